#include "prw/optimizer.hpp"

#include <cmath>
#include <string>

#include "prw/errors.hpp"

namespace prw {

void AdamConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ContractError("adam beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ContractError("adam beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ContractError("adam epsilon must be positive");
}

AdamState AdamState::zeros_like(std::span<const Matrix> params) {
  AdamState s;
  for (const auto& p : params) {
    s.first.emplace_back(p.rows(), p.cols());
    s.second.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(AdamState& state, std::span<Matrix> params, std::span<const Matrix> grads, double lr,
               const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.first.size()) {
    throw DimensionError("adam_step: parameter/gradient/state count mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size() || params[k].size() != state.first[k].size()) {
      throw DimensionError("adam_step: shape mismatch in tensor " + std::to_string(k));
    }
    if (!grads[k].all_finite()) throw NumericError("adam_step: non-finite gradient in tensor " + std::to_string(k));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data();
    auto g = grads[k].data();
    auto m = state.first[k].data();
    auto v = state.second[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double lr_schedule(std::size_t step, double lr0, std::size_t interval) {
  if (interval == 0) throw ContractError("lr_schedule: halving interval must be >= 1");
  return lr0 * std::pow(0.5, static_cast<double>(step / interval));
}

}  // namespace prw
