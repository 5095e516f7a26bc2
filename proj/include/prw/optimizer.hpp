#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prw/matrix.hpp"

namespace prw {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;

  void validate() const;
};

// First/second moment estimates, shaped like the parameters they track.
struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::uint64_t step = 0;

  static AdamState zeros_like(std::span<const Matrix> params);
};

// Bias-corrected Adam update:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Throws NumericError on a non-finite gradient, leaving everything untouched.
void adam_step(AdamState& state, std::span<Matrix> params, std::span<const Matrix> grads, double lr,
               const AdamConfig& config);

// lr0 * 0.5^floor(step / interval)
double lr_schedule(std::size_t step, double lr0, std::size_t interval);

}  // namespace prw
