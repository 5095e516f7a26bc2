#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prw/episode.hpp"
#include "prw/matrix.hpp"
#include "prw/protonet.hpp"
#include "prw/walk.hpp"

namespace prw {

// Round-trip scores of the unlabelled points and the points that survive the
// median rule.
struct FilterScores {
  std::vector<double> scores;      // s_j in [0, 1]
  std::vector<std::size_t> kept;   // ascending indices with s_j >= median(s)
};

// s_j = sum_c proto_to_point(c, j) * point_to_proto(j, c).
FilterScores filter_distractors(const WalkGraph& graph);
FilterScores filter_distractors(const Matrix& proto_to_point, const Matrix& point_to_proto);
// Keeps s_j >= median; an even count uses the mean of the two middle values.
FilterScores median_filter(std::vector<double> scores);

double median(std::vector<double> values);

enum class InferenceMode { plain, ssinfer, ssinfer_filter };

std::string_view to_string(InferenceMode mode);
InferenceMode parse_inference_mode(std::string_view name);

struct Prediction {
  std::vector<std::size_t> labels;  // argmax class per query
  Matrix probabilities;             // [n_query x N_c]
  std::optional<FilterScores> filter;
};

// plain:          embed -> prototypes -> classify queries
// ssinfer:        ... -> one soft k-means refinement with all unlabelled points
// ssinfer_filter: ... -> median filter on unlabelled points -> refinement
Prediction predict(const Episode& episode, const EmbeddingNet& net, InferenceMode mode);

Prediction semi_supervised_predict(const Episode& episode, const EmbeddingNet& net, bool use_filter);

double accuracy(std::span<const std::size_t> predicted, std::span<const std::size_t> truth);

}  // namespace prw
