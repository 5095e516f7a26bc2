#pragma once

#include <cstddef>
#include <cstdint>

#include "prw/dataset.hpp"

namespace prw {

// Shape of the generated class clusters.
struct ClusterShape {
  double cluster_std = 0.5;      // isotropic noise around each latent mean
  double mean_spread = 1.5;      // stddev of the latent means
  double min_separation = 1.0;   // minimum pairwise distance of latent means
  double warp_strength = 1.0;    // amplitude of each tanh-mix layer
  // Class-independent noise in the input_dim - latent_dim directions
  // orthogonal to the lifted latent space, added before the warp.
  double nuisance_std = 0.0;
};

// Warped Gaussian clusters: each class is an isotropic Gaussian in a
// latent_dim space, lifted isometrically into input_dim and then pushed
// through warp_depth layers of (random rotation, coordinatewise
// x + a*tanh(b*x + c)). Every layer is invertible. Values are rounded to
// float32 so the dataset survives a save/load unchanged.
Dataset generate_synthetic_dataset(std::size_t n_classes, std::size_t points_per_class,
                                   std::size_t latent_dim, std::size_t input_dim,
                                   std::size_t warp_depth, std::uint64_t seed,
                                   const ClusterShape& shape = {});

}  // namespace prw
