#include <doctest.h>

#include "prw/errors.hpp"
#include "prw/inference.hpp"

using namespace prw;

namespace {

EmbeddingNet identity_net(std::size_t d) {
  EmbeddingNet net({d, d});
  net.params()[0] = Matrix::identity(d);
  return net;
}

// Two well separated classes around (0,0) and (6,0) in the plane.
Episode separable_episode(bool with_far_point) {
  Episode ep;
  ep.support = Matrix{{0, 0}, {6, 0}};
  ep.support_labels = {0, 1};
  ep.class_ids = {0, 1};
  ep.query = Matrix{{0.4, 0.2}, {-0.3, 0.1}, {5.8, -0.2}, {6.3, 0.4}};
  ep.query_labels = {0, 0, 1, 1};
  std::vector<std::vector<double>> rows{{0.1, 0.1}, {-0.1, 0.05}, {6.1, 0}, {5.9, -0.1}};
  if (with_far_point) rows.push_back({50, 0});
  ep.unlabeled = Matrix(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ep.unlabeled(i, 0) = rows[i][0];
    ep.unlabeled(i, 1) = rows[i][1];
    ep.unlabeled_is_distractor.push_back(i == 4);
  }
  return ep;
}

}  // namespace

TEST_CASE("median rule") {
  CHECK(median({0.9, 0.8, 0.2, 0.1}) == 0.5);
  CHECK(median({3, 1, 2}) == 2);
  const FilterScores f = median_filter({0.9, 0.8, 0.2, 0.1});
  CHECK(f.kept == std::vector<std::size_t>{0, 1});
  const FilterScores eq = median_filter({0.3, 0.3, 0.3});
  CHECK(eq.kept == std::vector<std::size_t>{0, 1, 2});
  CHECK(median_filter({}).kept.empty());
}

TEST_CASE("far point scores below the median and is discarded") {
  const Episode ep = separable_episode(true);
  const WalkGraph g = build_walk_graph(ep.support, ep.unlabeled, 0);
  const FilterScores f = filter_distractors(g);
  REQUIRE(f.scores.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < 2; ++c) s += g.proto_to_point(c, j) * g.point_to_proto(j, c);
    CHECK(std::abs(f.scores[j] - s) <= 1e-15);
    CHECK(f.scores[j] >= 0.0);
    CHECK(f.scores[j] <= 1.0);
  }
  CHECK(f.scores[4] < median(f.scores));
  CHECK(std::find(f.kept.begin(), f.kept.end(), 4u) == f.kept.end());
}

TEST_CASE("no unlabelled points: semi-supervised prediction equals plain") {
  Episode ep = separable_episode(false);
  ep.unlabeled = Matrix(0, 2);
  ep.unlabeled_is_distractor.clear();
  const auto net = EmbeddingNet::initialized({2, 5, 3}, 4);
  const Prediction plain = predict(ep, net, InferenceMode::plain);
  CHECK(predict(ep, net, InferenceMode::ssinfer).probabilities == plain.probabilities);
  CHECK(predict(ep, net, InferenceMode::ssinfer_filter).probabilities == plain.probabilities);
}

TEST_CASE("filter does not change predictions on separable distractor-free data") {
  const Episode ep = separable_episode(false);
  const auto net = identity_net(2);
  const Prediction with = semi_supervised_predict(ep, net, true);
  const Prediction without = semi_supervised_predict(ep, net, false);
  CHECK(with.labels == without.labels);
  CHECK(with.labels == ep.query_labels);
  CHECK(accuracy(with.labels, ep.query_labels) == 1.0);
  REQUIRE(with.filter.has_value());
}

TEST_CASE("inference mode names") {
  for (auto m : {InferenceMode::plain, InferenceMode::ssinfer, InferenceMode::ssinfer_filter})
    CHECK(parse_inference_mode(to_string(m)) == m);
  CHECK(to_string(InferenceMode::ssinfer_filter) == "ssinfer-filter");
  CHECK_THROWS_AS(parse_inference_mode("bogus"), ConfigError);
}

TEST_CASE("accuracy") {
  CHECK(accuracy(std::vector<std::size_t>{0, 1, 1, 0}, std::vector<std::size_t>{0, 1, 0, 0}) == 0.75);
}
