#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prw/config.hpp"
#include "prw/synthetic.hpp"

namespace prw::cli {

struct GenDataOptions {
  std::size_t classes = 40;
  std::size_t per_class = 40;
  std::size_t latent_dim = 4;
  std::size_t input_dim = 16;
  std::size_t warp_depth = 2;
  std::uint64_t seed = 7;
  ClusterShape shape;
  std::filesystem::path out;
  bool force = false;
};

// Flags that override keys of the config document.
struct TrainOverrides {
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> out;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<std::size_t> tau;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> distractors;
  std::optional<std::uint64_t> seed;
  std::size_t log_every = 500;
};

struct EvalOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> dataset;
  std::filesystem::path checkpoint;
  std::string split = "test";
  std::optional<std::string> mode;
  std::optional<std::size_t> ways;
  std::optional<std::size_t> shots;
  std::optional<std::size_t> unlabeled;
  std::optional<std::size_t> queries;
  std::optional<std::size_t> distractors;
  std::optional<std::size_t> episodes;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
};

struct AnalyzeOptions {
  EvalOptions common;
  bool landing = false;
  std::size_t tau_max = 5;
  bool visit = false;
  std::vector<std::size_t> higher_way;
  std::optional<std::filesystem::path> baseline;
  bool export_embeddings = false;
};

void gen_data(const GenDataOptions& opts);
void train(const std::filesystem::path& config_path, const TrainOverrides& overrides);
void eval(const EvalOptions& opts);
void analyze(const AnalyzeOptions& opts);

}  // namespace prw::cli
