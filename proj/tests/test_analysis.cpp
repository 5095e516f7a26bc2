#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "prw/analysis.hpp"
#include "prw/errors.hpp"
#include "prw/synthetic.hpp"

using namespace prw;

TEST_CASE("landing probability examples") {
  CHECK(landing_probability(Matrix::identity(4)) == 1.0);
  CHECK(std::abs(landing_probability(Matrix(5, 5, 0.2)) - 0.2) <= 1e-15);

  std::mt19937_64 rng(6);
  const Matrix t = softmax_rows(oracle::random_matrix(4, 4, rng));
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) s += t(i, i);
  CHECK(std::abs(landing_probability(t) - s / 4.0) <= 1e-15);

  const WalkGraph g = build_walk_graph(oracle::random_matrix(3, 2, rng), oracle::random_matrix(5, 2, rng), 2);
  CHECK(landing_probability(g, 2) == landing_probability(g.walkers[2]));
  CHECK_THROWS_AS(landing_probability(g, 3), ContractError);
}

TEST_CASE("visit split examples") {
  const Matrix p2x{{0.2, 0.3, 0.5}, {0.1, 0.1, 0.8}};
  const VisitSplit none = visit_split(p2x, {false, false, false});
  CHECK(std::abs(none.clean - 1.0) <= 1e-15);
  CHECK(none.distractor == 0.0);

  // Prototypes on the x axis, clean points above and distractors mirrored below.
  const Matrix protos{{-1, 0}, {1, 0}};
  const Matrix points{{-0.5, 1}, {0.7, 2}, {-0.5, -1}, {0.7, -2}};
  const WalkGraph g = build_walk_graph(protos, points, 0);
  const VisitSplit half = visit_split(g.proto_to_point, {false, false, true, true});
  CHECK(std::abs(half.clean - 0.5) <= 1e-12);
  CHECK(std::abs(half.distractor - 0.5) <= 1e-12);
}

TEST_CASE("accuracy summary") {
  const std::vector<double> perfect(10, 1.0);
  const auto s = summarize(perfect);
  CHECK(s.mean == 1.0);
  CHECK(s.ci95 == 0.0);

  const auto two = summarize(std::vector<double>{1.0, 0.0});
  CHECK(two.mean == 0.5);
  CHECK(std::abs(two.ci95 - 1.96 * std::sqrt(0.5) / std::sqrt(2.0)) <= 1e-12);
  CHECK(two.ci95 == doctest::Approx(0.98));

  std::mt19937_64 rng(1);
  std::vector<double> acc(50);
  for (auto& a : acc) a = std::uniform_real_distribution<double>(0, 1)(rng);
  const auto forward = summarize(acc);
  std::shuffle(acc.begin(), acc.end(), rng);
  const auto shuffled = summarize(acc);
  CHECK(std::abs(forward.mean - shuffled.mean) <= 1e-12);
  CHECK(std::abs(forward.ci95 - shuffled.ci95) <= 1e-12);
  CHECK(summarize(std::vector<double>{0.7}).ci95 == 0.0);
}

TEST_CASE("relative improvement") {
  CHECK(std::abs(relative_improvement(0.6, 0.5) - 0.2) <= 1e-12);
}

TEST_CASE("evaluation and metrics on a synthetic split") {
  auto ds = std::make_shared<const Dataset>(generate_synthetic_dataset(12, 30, 2, 6, 1, 3));
  const auto split = split_dataset(ds, 0.4, 0);
  const EpisodeStream stream{&split, {5, 1, 3, 4, 2}, 11};
  const auto net = EmbeddingNet::initialized({6, 8, 4}, 2);

  const EvalResult a = evaluate(net, stream, 20, InferenceMode::ssinfer_filter);
  const EvalResult b = evaluate(net, stream, 20, InferenceMode::ssinfer_filter);
  CHECK(a.per_episode == b.per_episode);
  CHECK(a.summary.n == 20);

  const MetricsRecord rec = episode_metrics(net, stream(0), 0, InferenceMode::plain, 3, {3, 0.7, 0.5});
  CHECK(rec.landing.size() == 4);
  CHECK(std::abs(rec.p_clean + rec.p_dist - 1.0) <= 1e-12);
  std::ostringstream csv;
  write_metrics_csv(csv, std::vector{rec}, 3);
  CHECK(csv.str().rfind(
            "episode,accuracy,landing_tau0,landing_tau1,landing_tau2,landing_tau3,p_clean,p_dist,"
            "filter_precision,filter_recall,l_supervised,l_walker,l_visit,l_rw,total\n",
            0) == 0);

  const std::vector<std::size_t> ways{2, 4, 6};
  const auto sweep = higher_way_sweep(net, split, ways, {5, 1, 0, 4, 0}, 10, 5, InferenceMode::plain, &net);
  REQUIRE(sweep.size() == 3);
  for (const auto& w : sweep) {
    REQUIRE(w.improvement.has_value());
    CHECK(*w.improvement == 0.0);
  }
}
