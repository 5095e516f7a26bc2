#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "prw/episode.hpp"
#include "prw/inference.hpp"
#include "prw/protonet.hpp"
#include "prw/walk.hpp"

namespace prw {

// Mean diagonal of a walker matrix: the probability that a walk started at a
// uniformly chosen prototype lands back on it.
double landing_probability(const Matrix& walker);
double landing_probability(const WalkGraph& graph, std::size_t tau);

struct VisitSplit {
  double clean = 0.0;
  double distractor = 0.0;
};

// Splits the first-step visit distribution between clean and distractor points.
VisitSplit visit_split(const Matrix& proto_to_point, const std::vector<bool>& is_distractor);

struct AccuracySummary {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * sample stddev / sqrt(n); 0 when n == 1
  std::size_t n = 0;
};

AccuracySummary summarize(std::span<const double> per_episode);

struct EvalResult {
  AccuracySummary summary;
  std::vector<double> per_episode;
};

double episode_accuracy(const EmbeddingNet& net, const Episode& episode, InferenceMode mode);

// Accuracy over episodes 0..n_episodes-1 of `stream`.
EvalResult evaluate(const EmbeddingNet& net, const EpisodeStream& stream, std::size_t n_episodes,
                    InferenceMode mode);

// Per-episode diagnostics. Fields that need unlabelled points (landing,
// visit split, filter quality) are NaN when the episode has none; filter
// precision/recall are NaN when undefined (nothing discarded / no distractors).
struct MetricsRecord {
  std::size_t episode = 0;
  double accuracy = 0.0;
  std::vector<double> landing;  // tau = 0..tau_max
  double p_clean = 0.0;
  double p_dist = 0.0;
  double filter_precision = 0.0;
  double filter_recall = 0.0;
  LossBreakdown losses;
};

MetricsRecord episode_metrics(const EmbeddingNet& net, const Episode& episode, std::size_t episode_id,
                              InferenceMode mode, std::size_t tau_max, const PRWConfig& loss_config);

// Header: episode,accuracy,landing_tau0..landing_tauK,p_clean,p_dist,
//         filter_precision,filter_recall,l_supervised,l_walker,l_visit,l_rw,total
void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records, std::size_t tau_max);

double relative_improvement(double model_accuracy, double baseline_accuracy);

struct WayResult {
  std::size_t ways = 0;
  AccuracySummary model;
  std::optional<AccuracySummary> baseline;
  std::optional<double> improvement;  // (model - baseline) / baseline
};

// One evaluation per way count; only n_classes varies from `tmpl`. Emits a
// warning on stderr when accuracy rises with the way count.
std::vector<WayResult> higher_way_sweep(const EmbeddingNet& net, const DatasetSplit& split,
                                        std::span<const std::size_t> ways, const EpisodeSpec& tmpl,
                                        std::size_t n_episodes, std::uint64_t seed, InferenceMode mode,
                                        const EmbeddingNet* baseline = nullptr);

}  // namespace prw
