#include "prw/protonet.hpp"

#include <cmath>
#include <random>
#include <string>

#include "prw/episode.hpp"
#include "prw/errors.hpp"

namespace prw {

EmbeddingNet::EmbeddingNet(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ContractError("embedding net needs at least input and output sizes");
  for (auto s : sizes_) {
    if (s == 0) throw ContractError("embedding net layer size must be positive");
  }
  if (sizes_.back() < 2) throw ContractError("embedding dimension must be at least 2");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    params_.emplace_back(sizes_[l], sizes_[l + 1]);
    params_.emplace_back(1, sizes_[l + 1]);
  }
}

EmbeddingNet EmbeddingNet::initialized(std::vector<std::size_t> layer_sizes, std::uint64_t seed) {
  EmbeddingNet net(std::move(layer_sizes));
  Rng rng = derived_rng(seed, 0x1417, 0);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double fan = static_cast<double>(net.sizes_[l] + net.sizes_[l + 1]);
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan), std::sqrt(6.0 / fan));
    for (auto& w : net.params_[2 * l].data()) w = dist(rng);
  }
  return net;
}

std::size_t EmbeddingNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

Matrix EmbeddingNet::embed(const Matrix& batch) const {
  ad::Tape tape;
  auto bound = bind(tape, false);
  return embed(bound, tape.constant(batch)).value();
}

std::vector<ad::Var> EmbeddingNet::bind(ad::Tape& tape, bool trainable) const {
  std::vector<ad::Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(trainable ? tape.parameter(p) : tape.constant(p));
  return out;
}

ad::Var EmbeddingNet::embed(std::span<const ad::Var> bound, ad::Var batch) const {
  if (bound.size() != params_.size()) throw ContractError("embed: parameter binding size mismatch");
  if (batch.cols() != input_dim()) {
    throw DimensionError("embed: batch has " + std::to_string(batch.cols()) + " columns, net expects " +
                         std::to_string(input_dim()));
  }
  ad::Var h = batch;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    h = ad::add_row_broadcast(ad::matmul(h, bound[2 * l]), bound[2 * l + 1]);
    if (l + 1 < num_layers()) h = ad::relu(h);
  }
  return h;
}

namespace {

// [n_classes x n] with 1/count_c where labels[i] == c.
Matrix averaging_matrix(std::span<const std::size_t> labels, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (auto l : labels) {
    if (l >= n_classes) throw ContractError("label " + std::to_string(l) + " outside class roster");
    ++counts[l];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) throw ContractError("class " + std::to_string(c) + " has no labeled support");
  }
  Matrix w(n_classes, labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    w(labels[i], i) = 1.0 / static_cast<double>(counts[labels[i]]);
  }
  return w;
}

Matrix one_hot(std::span<const std::size_t> labels, std::size_t n_classes) {
  Matrix m(labels.size(), n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) {
      throw ContractError("label " + std::to_string(labels[i]) + " outside class roster");
    }
    m(i, labels[i]) = 1.0;
  }
  return m;
}

}  // namespace

ad::Var compute_prototypes(ad::Var emb, std::span<const std::size_t> labels, std::size_t n_classes) {
  if (labels.size() != emb.rows()) throw DimensionError("compute_prototypes: label count mismatch");
  return ad::matmul(emb.tape()->constant(averaging_matrix(labels, n_classes)), emb);
}

Matrix compute_prototypes(const Matrix& emb, std::span<const std::size_t> labels, std::size_t n_classes) {
  ad::Tape tape;
  return compute_prototypes(tape.constant(emb), labels, n_classes).value();
}

ad::Var classify(ad::Var emb, ad::Var protos) {
  return ad::softmax_rows(ad::neg(ad::pairwise_sq_dist(emb, protos)));
}

Matrix classify(const Matrix& emb, const Matrix& protos) {
  ad::Tape tape;
  return classify(tape.constant(emb), tape.constant(protos)).value();
}

ad::Var supervised_loss(ad::Var probs, std::span<const std::size_t> labels, ClampCounter* clamps) {
  if (labels.size() != probs.rows() || labels.empty()) {
    throw DimensionError("supervised_loss: label count mismatch");
  }
  ad::Tape& t = *probs.tape();
  ad::Var picked = ad::mul(ad::log_floor(probs, kLogFloor, clamps), t.constant(one_hot(labels, probs.cols())));
  return ad::scale(ad::sum_all(picked), -1.0 / static_cast<double>(labels.size()));
}

double supervised_loss(const Matrix& probs, std::span<const std::size_t> labels, ClampCounter* clamps) {
  ad::Tape tape;
  return supervised_loss(tape.constant(probs), labels, clamps).value()(0, 0);
}

ad::Var refine_prototypes(ad::Var protos, ad::Var labeled_emb, std::span<const std::size_t> labels,
                          ad::Var unlabeled_emb) {
  if (unlabeled_emb.rows() == 0) return protos;
  ad::Tape& t = *protos.tape();
  const std::size_t n_classes = protos.rows();
  ad::Var hard = t.constant(one_hot(labels, n_classes));     // [n_l x N_c]
  ad::Var soft = classify(unlabeled_emb, protos);            // [M x N_c]
  ad::Var weighted = ad::add(ad::matmul(ad::transpose(hard), labeled_emb),
                             ad::matmul(ad::transpose(soft), unlabeled_emb));
  ad::Var mass = ad::add(ad::transpose(ad::sum_cols(hard)), ad::transpose(ad::sum_cols(soft)));
  return ad::scale_rows(weighted, ad::reciprocal(mass));
}

Matrix refine_prototypes(const Matrix& protos, const Matrix& labeled_emb,
                         std::span<const std::size_t> labels, const Matrix& unlabeled_emb) {
  ad::Tape tape;
  return refine_prototypes(tape.constant(protos), tape.constant(labeled_emb), labels,
                           tape.constant(unlabeled_emb))
      .value();
}

std::vector<std::size_t> argmax_rows(const Matrix& m) {
  std::vector<std::size_t> out(m.rows(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, out[i])) out[i] = j;
    }
  }
  return out;
}

}  // namespace prw
