#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "prw/episode.hpp"
#include "prw/inference.hpp"
#include "prw/trainer.hpp"

namespace prw {

// Classes are assigned to train/val/test in manifest order.
struct ClassPartition {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct EvalProtocol {
  EpisodeSpec episode;  // test-time composition
  std::size_t episodes = 3000;
  InferenceMode mode = InferenceMode::plain;
  std::uint64_t seed = 2024;
};

// One run's configuration document. See README for the schema; every key is
// optional and falls back to the defaults below, unknown keys are rejected.
struct RunConfig {
  std::filesystem::path dataset;
  std::filesystem::path output_dir = "run";
  ClassPartition classes;  // all zero: every class is a training class
  double label_fraction = 0.4;
  std::uint64_t split_seed = 0;
  TrainConfig train;
  EvalProtocol eval;
};

// Parses and validates a configuration document. Errors name the offending
// key path, e.g. "episode.shots".
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// Dataset class ranges resolved against a dataset with `n_classes` classes.
struct ResolvedPartition {
  std::size_t train_first = 0, train_count = 0;
  std::size_t val_first = 0, val_count = 0;
  std::size_t test_first = 0, test_count = 0;
};
ResolvedPartition resolve_partition(const ClassPartition& p, std::size_t n_classes);

}  // namespace prw
