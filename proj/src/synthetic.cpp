#include "prw/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "prw/episode.hpp"
#include "prw/errors.hpp"

namespace prw {

namespace {

// Rows form an orthonormal basis (Gram-Schmidt on a Gaussian matrix).
Matrix random_rotation(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      for (auto& v : q.row(i)) v = normal(rng);
      for (std::size_t k = 0; k < i; ++k) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += q(i, j) * q(k, j);
        for (std::size_t j = 0; j < n; ++j) q(i, j) -= dot * q(k, j);
      }
      double norm = 0.0;
      for (double v : q.row(i)) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < 1e-6) continue;
      for (auto& v : q.row(i)) v /= norm;
      break;
    }
  }
  return q;
}

struct WarpLayer {
  Matrix rotation;  // applied as x * rotation
  std::vector<double> gain;
  std::vector<double> offset;
};

}  // namespace

Dataset generate_synthetic_dataset(std::size_t n_classes, std::size_t points_per_class,
                                   std::size_t latent_dim, std::size_t input_dim,
                                   std::size_t warp_depth, std::uint64_t seed,
                                   const ClusterShape& shape) {
  if (latent_dim < 2 || input_dim < latent_dim) {
    throw ContractError("synthetic data needs input_dim >= latent_dim >= 2");
  }
  if (n_classes == 0 || points_per_class == 0) {
    throw ContractError("synthetic data needs at least one class and one point per class");
  }
  Rng rng = derived_rng(seed, 0x5e7, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  // Latent means with rejection on the minimum pairwise separation.
  Matrix means(n_classes, latent_dim);
  for (std::size_t c = 0; c < n_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      for (auto& v : means.row(c)) v = shape.mean_spread * normal(rng);
      placed = true;
      for (std::size_t o = 0; o < c && placed; ++o) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < latent_dim; ++k) {
          const double d = means(c, k) - means(o, k);
          d2 += d * d;
        }
        placed = d2 >= shape.min_separation * shape.min_separation;
      }
    }
    if (!placed) throw ContractError("could not place separated class means; increase mean_spread");
  }

  const Matrix lift = random_rotation(input_dim, rng);  // first latent_dim rows used
  std::vector<WarpLayer> layers;
  for (std::size_t l = 0; l < warp_depth; ++l) {
    WarpLayer layer{random_rotation(input_dim, rng), {}, {}};
    for (std::size_t k = 0; k < input_dim; ++k) {
      layer.gain.push_back(1.0 + 0.5 * uniform(rng));
      layer.offset.push_back(uniform(rng));
    }
    layers.push_back(std::move(layer));
  }

  std::vector<ClassRecord> classes;
  std::vector<double> latent(latent_dim);
  std::vector<double> x(input_dim), y(input_dim);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Matrix pts(points_per_class, input_dim);
    for (std::size_t p = 0; p < points_per_class; ++p) {
      for (std::size_t k = 0; k < latent_dim; ++k) latent[k] = means(c, k) + shape.cluster_std * normal(rng);
      for (std::size_t j = 0; j < input_dim; ++j) {
        x[j] = 0.0;
        for (std::size_t k = 0; k < latent_dim; ++k) x[j] += latent[k] * lift(k, j);
      }
      if (shape.nuisance_std > 0.0) {
        for (std::size_t k = latent_dim; k < input_dim; ++k) {
          const double n = shape.nuisance_std * normal(rng);
          for (std::size_t j = 0; j < input_dim; ++j) x[j] += n * lift(k, j);
        }
      }
      for (const auto& layer : layers) {
        for (std::size_t j = 0; j < input_dim; ++j) {
          y[j] = 0.0;
          for (std::size_t k = 0; k < input_dim; ++k) y[j] += x[k] * layer.rotation(k, j);
        }
        for (std::size_t j = 0; j < input_dim; ++j) {
          x[j] = y[j] + shape.warp_strength * std::tanh(layer.gain[j] * y[j] + layer.offset[j]);
        }
      }
      for (std::size_t j = 0; j < input_dim; ++j) pts(p, j) = static_cast<float>(x[j]);
    }
    char id[32];
    std::snprintf(id, sizeof id, "class_%04zu", c);
    classes.push_back({id, std::move(pts)});
  }
  return Dataset(std::move(classes));
}

}  // namespace prw
