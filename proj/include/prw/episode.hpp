#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "prw/dataset.hpp"
#include "prw/matrix.hpp"

namespace prw {

using Rng = std::mt19937_64;

// Labelled/unlabelled partition of every class in a dataset.
struct DatasetSplit {
  std::shared_ptr<const Dataset> data;
  std::vector<std::vector<std::size_t>> labeled;    // per class, point indices
  std::vector<std::vector<std::size_t>> unlabeled;  // per class, point indices
  double label_fraction = 1.0;
  std::uint64_t seed = 0;
};

// Per class: labeled count = max(1, round(fraction * size)); the remainder is
// unlabeled. Deterministic in `seed`.
DatasetSplit split_dataset(std::shared_ptr<const Dataset> ds, double fraction, std::uint64_t seed);

struct EpisodeSpec {
  std::size_t n_classes = 5;            // N_c
  std::size_t shots = 1;                // N_s
  std::size_t unlabeled_per_class = 0;  // N_u
  std::size_t queries_per_class = 5;    // N_q
  std::size_t distractor_classes = 0;   // N_d

  void validate() const;
};

// Where a sampled point came from in the dataset.
struct PointRef {
  std::size_t cls = 0;    // dataset class index
  std::size_t index = 0;  // row within the class
};

struct Episode {
  Matrix support;                       // [N_c*N_s x d]
  std::vector<std::size_t> support_labels;  // episode class index per row
  Matrix unlabeled;                     // [(N_c+N_d)*N_u x d], shuffled
  Matrix query;                         // [N_c*N_q x d]
  std::vector<std::size_t> query_labels;
  std::vector<std::size_t> class_ids;   // dataset class index per episode class

  // Analysis-only provenance. Training losses must not read these.
  std::vector<bool> unlabeled_is_distractor;
  std::vector<PointRef> support_refs;
  std::vector<PointRef> unlabeled_refs;
  std::vector<PointRef> query_refs;

  std::size_t n_classes() const { return class_ids.size(); }
};

// Draws one episode. Episode and distractor classes are drawn uniformly
// without replacement; support and query come from the labelled pool and are
// disjoint; unlabelled points come from the unlabelled pools.
Episode sample_episode(const DatasetSplit& split, const EpisodeSpec& spec, Rng& rng);

// Throws CapacityError unless every episode drawn with `spec` can be filled:
// enough classes, and every class holds enough labelled and unlabelled points.
void check_capacity(const DatasetSplit& split, const EpisodeSpec& spec);

// Deterministic episode source: episode k is drawn from an rng seeded by
// (seed, k), so episodes can be produced in any order.
struct EpisodeStream {
  const DatasetSplit* split = nullptr;
  EpisodeSpec spec;
  std::uint64_t seed = 0;

  Episode operator()(std::size_t k) const;
};

Rng derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace prw
