#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "prw/checkpoint.hpp"
#include "prw/episode.hpp"
#include "prw/inference.hpp"
#include "prw/optimizer.hpp"
#include "prw/walk.hpp"

namespace prw {

struct TrainConfig {
  EpisodeSpec episode;
  PRWConfig prw;
  AdamConfig adam;
  double lr = 1e-3;
  std::size_t halving_interval = 1000;
  std::size_t max_episodes = 4000;
  std::size_t validation_interval = 500;  // 0 disables validation
  std::size_t validation_episodes = 200;
  InferenceMode validation_mode = InferenceMode::plain;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t embedding_dim = 16;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  // FNV-1a of the canonical JSON form.
  std::string digest() const;
  // "pn-baseline" when lambda == 0, else "prwn".
  std::string tag() const;
};

struct EpisodeLog {
  std::size_t episode = 0;
  double lr = 0.0;
  LossBreakdown losses;
  double query_accuracy = 0.0;
  std::size_t clamp_events = 0;
};

struct ValidationLog {
  std::size_t episode = 0;
  double accuracy = 0.0;
  double ci95 = 0.0;
  bool best = false;
};

struct TrainResult {
  Checkpoint checkpoint;  // best by validation accuracy, else the final weights
  std::vector<EpisodeLog> episodes;
  std::vector<ValidationLog> validation;
};

using ProgressFn = std::function<void(const EpisodeLog&)>;

// Episodic training: one Adam step per sampled episode. Validation (when a
// split is given and the interval is nonzero) runs every validation_interval
// episodes and after the last one. Deterministic in config.seed.
TrainResult train(const TrainConfig& config, const DatasetSplit& train_split,
                  const DatasetSplit* validation_split = nullptr, const ProgressFn& progress = {});

// Header: episode,lr,l_supervised,l_walker,l_visit,l_rw,total,lambda,alpha,query_accuracy,clamp_events
void write_episode_csv(std::ostream& out, std::span<const EpisodeLog> rows);
// Header: episode,accuracy,ci95,best
void write_validation_csv(std::ostream& out, std::span<const ValidationLog> rows);

}  // namespace prw
