#include "prw/analysis.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "prw/errors.hpp"
#include "prw/objective.hpp"

namespace prw {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double landing_probability(const Matrix& walker) {
  if (walker.rows() != walker.cols() || walker.rows() == 0) {
    throw DimensionError("landing_probability: walker matrix must be square and nonempty");
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < walker.rows(); ++i) trace += walker(i, i);
  return trace / static_cast<double>(walker.rows());
}

double landing_probability(const WalkGraph& graph, std::size_t tau) {
  if (tau >= graph.walkers.size()) {
    throw ContractError("landing_probability: tau " + std::to_string(tau) + " exceeds graph tau " +
                        std::to_string(graph.walkers.size() - 1));
  }
  return landing_probability(graph.walkers[tau]);
}

VisitSplit visit_split(const Matrix& proto_to_point, const std::vector<bool>& is_distractor) {
  if (is_distractor.size() != proto_to_point.cols()) {
    throw DimensionError("visit_split: flag count does not match point count");
  }
  const auto p = visit_distribution(proto_to_point);
  VisitSplit out;
  for (std::size_t j = 0; j < p.size(); ++j) (is_distractor[j] ? out.distractor : out.clean) += p[j];
  return out;
}

AccuracySummary summarize(std::span<const double> per_episode) {
  AccuracySummary s;
  s.n = per_episode.size();
  if (s.n == 0) throw ContractError("summarize: no episodes");
  double sum = 0.0;
  for (double a : per_episode) sum += a;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double a : per_episode) ss += (a - s.mean) * (a - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

double episode_accuracy(const EmbeddingNet& net, const Episode& episode, InferenceMode mode) {
  const Prediction p = predict(episode, net, mode);
  return accuracy(p.labels, episode.query_labels);
}

EvalResult evaluate(const EmbeddingNet& net, const EpisodeStream& stream, std::size_t n_episodes,
                    InferenceMode mode) {
  if (n_episodes == 0) throw ContractError("evaluate: n_episodes must be >= 1");
  EvalResult r;
  r.per_episode.reserve(n_episodes);
  for (std::size_t k = 0; k < n_episodes; ++k) r.per_episode.push_back(episode_accuracy(net, stream(k), mode));
  r.summary = summarize(r.per_episode);
  return r;
}

MetricsRecord episode_metrics(const EmbeddingNet& net, const Episode& episode, std::size_t episode_id,
                              InferenceMode mode, std::size_t tau_max, const PRWConfig& loss_config) {
  MetricsRecord rec;
  rec.episode = episode_id;
  rec.accuracy = episode_accuracy(net, episode, mode);

  ad::Tape tape;
  auto params = net.bind(tape, false);
  rec.losses = episode_objective(tape, net, params, episode, loss_config).losses;

  const std::size_t m = episode.unlabeled.rows();
  rec.p_clean = rec.p_dist = rec.filter_precision = rec.filter_recall = kNaN;
  if (m == 0) return rec;

  const Matrix support = net.embed(episode.support);
  const Matrix protos = compute_prototypes(support, episode.support_labels, episode.n_classes());
  const Matrix unlabeled = net.embed(episode.unlabeled);
  const WalkGraph graph = build_walk_graph(protos, unlabeled, m == 1 ? 0 : tau_max);
  for (const auto& t : graph.walkers) rec.landing.push_back(landing_probability(t));

  const VisitSplit split = visit_split(graph.proto_to_point, episode.unlabeled_is_distractor);
  rec.p_clean = split.clean;
  rec.p_dist = split.distractor;

  const FilterScores filter = filter_distractors(graph);
  std::vector<bool> kept(m, false);
  for (auto j : filter.kept) kept[j] = true;
  std::size_t discarded = 0, discarded_dist = 0, distractors = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const bool dist = episode.unlabeled_is_distractor[j];
    distractors += dist ? 1 : 0;
    if (!kept[j]) {
      ++discarded;
      discarded_dist += dist ? 1 : 0;
    }
  }
  if (discarded > 0) rec.filter_precision = static_cast<double>(discarded_dist) / static_cast<double>(discarded);
  if (distractors > 0) rec.filter_recall = static_cast<double>(discarded_dist) / static_cast<double>(distractors);
  return rec;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRecord> records, std::size_t tau_max) {
  out << "episode,accuracy";
  for (std::size_t t = 0; t <= tau_max; ++t) out << ",landing_tau" << t;
  out << ",p_clean,p_dist,filter_precision,filter_recall,l_supervised,l_walker,l_visit,l_rw,total\n";
  out.precision(17);
  for (const auto& r : records) {
    out << r.episode << ',' << r.accuracy;
    for (std::size_t t = 0; t <= tau_max; ++t) {
      out << ',';
      if (t < r.landing.size()) out << r.landing[t];
      else out << "nan";
    }
    out << ',' << r.p_clean << ',' << r.p_dist << ',' << r.filter_precision << ',' << r.filter_recall << ','
        << r.losses.supervised << ',' << r.losses.walker << ',' << r.losses.visit << ',' << r.losses.rw << ','
        << r.losses.total << '\n';
  }
}

double relative_improvement(double model_accuracy, double baseline_accuracy) {
  if (baseline_accuracy == 0.0) throw ContractError("relative_improvement: baseline accuracy is zero");
  return (model_accuracy - baseline_accuracy) / baseline_accuracy;
}

std::vector<WayResult> higher_way_sweep(const EmbeddingNet& net, const DatasetSplit& split,
                                        std::span<const std::size_t> ways, const EpisodeSpec& tmpl,
                                        std::size_t n_episodes, std::uint64_t seed, InferenceMode mode,
                                        const EmbeddingNet* baseline) {
  std::vector<WayResult> out;
  for (auto w : ways) {
    EpisodeSpec spec = tmpl;
    spec.n_classes = w;
    if (split.data->num_classes() < w + spec.distractor_classes) {
      throw CapacityError(std::to_string(w) + "-way episodes need " + std::to_string(w + spec.distractor_classes) +
                          " classes, split has " + std::to_string(split.data->num_classes()));
    }
    const EpisodeStream stream{&split, spec, seed};
    WayResult r;
    r.ways = w;
    r.model = evaluate(net, stream, n_episodes, mode).summary;
    if (baseline != nullptr) {
      r.baseline = evaluate(*baseline, stream, n_episodes, mode).summary;
      r.improvement = relative_improvement(r.model.mean, r.baseline->mean);
    }
    if (!out.empty() && r.model.mean > out.back().model.mean) {
      std::cerr << "warning: accuracy rose from " << out.back().model.mean << " at " << out.back().ways
                << "-way to " << r.model.mean << " at " << w << "-way\n";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace prw
