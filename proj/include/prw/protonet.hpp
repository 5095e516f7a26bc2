#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prw/autodiff.hpp"
#include "prw/matrix.hpp"

namespace prw {

// Feedforward embedding network: Linear -> ReLU -> ... -> Linear.
// Parameters are stored as [W0, b0, W1, b1, ...] with W_l of shape
// [in x out] and b_l of shape [1 x out].
class EmbeddingNet {
 public:
  EmbeddingNet() = default;
  // Zero-valued parameters for the given layer sizes [d, h1, ..., E].
  explicit EmbeddingNet(std::vector<std::size_t> layer_sizes);

  // Glorot-uniform weights, zero biases.
  static EmbeddingNet initialized(std::vector<std::size_t> layer_sizes, std::uint64_t seed);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t parameter_count() const;

  std::vector<Matrix>& params() { return params_; }
  const std::vector<Matrix>& params() const { return params_; }

  Matrix embed(const Matrix& batch) const;

  // Puts the parameters on the tape (as parameters when `trainable`).
  std::vector<ad::Var> bind(ad::Tape& tape, bool trainable = true) const;
  // Differentiable forward pass with parameters previously bound by bind().
  ad::Var embed(std::span<const ad::Var> bound, ad::Var batch) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Matrix> params_;
};

// Per-class mean of `emb` rows; labels index classes 0..n_classes-1.
ad::Var compute_prototypes(ad::Var emb, std::span<const std::size_t> labels, std::size_t n_classes);
Matrix compute_prototypes(const Matrix& emb, std::span<const std::size_t> labels, std::size_t n_classes);

// Row i: softmax over classes of -||h_i - p_c||^2.
ad::Var classify(ad::Var emb, ad::Var protos);
Matrix classify(const Matrix& emb, const Matrix& protos);

inline constexpr double kLogFloor = 1e-12;

// Mean over rows of -log(probs[i][label_i]); probabilities at or below
// kLogFloor are clamped and tallied in `clamps`.
ad::Var supervised_loss(ad::Var probs, std::span<const std::size_t> labels,
                        ClampCounter* clamps = nullptr);
double supervised_loss(const Matrix& probs, std::span<const std::size_t> labels,
                       ClampCounter* clamps = nullptr);

// One soft k-means step. Labelled points are hard-assigned to their class,
// unlabelled points softly via classify() against `protos`; each refined
// prototype is the weighted mean of all points. With no unlabelled points the
// input prototypes are returned as-is.
ad::Var refine_prototypes(ad::Var protos, ad::Var labeled_emb, std::span<const std::size_t> labels,
                          ad::Var unlabeled_emb);
Matrix refine_prototypes(const Matrix& protos, const Matrix& labeled_emb,
                         std::span<const std::size_t> labels, const Matrix& unlabeled_emb);

std::vector<std::size_t> argmax_rows(const Matrix& m);

}  // namespace prw
