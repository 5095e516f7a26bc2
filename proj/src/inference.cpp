#include "prw/inference.hpp"

#include <algorithm>
#include <string>

#include "prw/errors.hpp"

namespace prw {

double median(std::vector<double> values) {
  if (values.empty()) throw ContractError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

FilterScores median_filter(std::vector<double> scores) {
  FilterScores out;
  out.scores = std::move(scores);
  if (out.scores.empty()) return out;
  const double cut = median(out.scores);
  for (std::size_t j = 0; j < out.scores.size(); ++j) {
    if (out.scores[j] >= cut) out.kept.push_back(j);
  }
  return out;
}

FilterScores filter_distractors(const Matrix& proto_to_point, const Matrix& point_to_proto) {
  if (proto_to_point.rows() != point_to_proto.cols() || proto_to_point.cols() != point_to_proto.rows()) {
    throw DimensionError("filter_distractors: transition matrices are not transposed shapes");
  }
  std::vector<double> s(proto_to_point.cols(), 0.0);
  for (std::size_t c = 0; c < proto_to_point.rows(); ++c)
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += proto_to_point(c, j) * point_to_proto(j, c);
  return median_filter(std::move(s));
}

FilterScores filter_distractors(const WalkGraph& graph) {
  return filter_distractors(graph.proto_to_point, graph.point_to_proto);
}

std::string_view to_string(InferenceMode mode) {
  switch (mode) {
    case InferenceMode::plain: return "plain";
    case InferenceMode::ssinfer: return "ssinfer";
    case InferenceMode::ssinfer_filter: return "ssinfer-filter";
  }
  return "plain";
}

InferenceMode parse_inference_mode(std::string_view name) {
  if (name == "plain") return InferenceMode::plain;
  if (name == "ssinfer") return InferenceMode::ssinfer;
  if (name == "ssinfer-filter") return InferenceMode::ssinfer_filter;
  throw ConfigError("unknown inference mode '" + std::string(name) +
                    "' (expected plain, ssinfer or ssinfer-filter)");
}

Prediction predict(const Episode& episode, const EmbeddingNet& net, InferenceMode mode) {
  const Matrix support = net.embed(episode.support);
  const Matrix query = net.embed(episode.query);
  Matrix protos = compute_prototypes(support, episode.support_labels, episode.n_classes());

  Prediction out;
  if (mode != InferenceMode::plain && episode.unlabeled.rows() > 0) {
    Matrix unlabeled = net.embed(episode.unlabeled);
    if (mode == InferenceMode::ssinfer_filter) {
      const WalkGraph graph = build_walk_graph(protos, unlabeled, 0);
      out.filter = filter_distractors(graph);
      unlabeled = unlabeled.gather_rows(out.filter->kept);
    }
    protos = refine_prototypes(protos, support, episode.support_labels, unlabeled);
  }
  out.probabilities = classify(query, protos);
  out.labels = argmax_rows(out.probabilities);
  return out;
}

Prediction semi_supervised_predict(const Episode& episode, const EmbeddingNet& net, bool use_filter) {
  return predict(episode, net, use_filter ? InferenceMode::ssinfer_filter : InferenceMode::ssinfer);
}

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw DimensionError("accuracy: prediction/label count mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace prw
