#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prw/errors.hpp"
#include "prw/walk.hpp"

using namespace prw;

TEST_CASE("single unlabelled point funnels every walk") {
  const Matrix protos{{0, 0}, {1, 0}, {0, 2}};
  const Matrix point{{0.4, 0.3}};
  const WalkGraph g = build_walk_graph(protos, point, 0);
  for (std::size_t c = 0; c < 3; ++c) CHECK(g.proto_to_point(c, 0) == 1.0);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(g.walkers[0](r, c) - g.point_to_proto(0, c)) <= 1e-15);
  CHECK(std::abs(visit_loss(g.proto_to_point)) <= 1e-15);
  CHECK_THROWS_AS(build_walk_graph(protos, point, 1), DegenerateError);
}

TEST_CASE("identity transitions give identity walkers") {
  const Matrix id = Matrix::identity(3);
  const auto walkers = walker_matrices(id, id, id, 2);
  REQUIRE(walkers.size() == 3);
  for (const auto& t : walkers) CHECK(t == id);
  CHECK(walker_loss(walkers, 0.7) == 0.0);
}

TEST_CASE("walker matrices equal exhaustive path enumeration") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix protos = oracle::random_matrix(3, 2, rng);
    const Matrix points = oracle::random_matrix(5, 2, rng);
    const WalkGraph g = build_walk_graph(protos, points, 3);
    const auto t = oracle::transitions(protos, points);
    REQUIRE(g.walkers.size() == 4);
    for (std::size_t i = 0; i <= 3; ++i)
      CHECK(oracle::max_abs_diff(g.walkers[i], oracle::enumerate_walks(t, i)) <= 1e-10);
  }
}

TEST_CASE("walk graph matrices are row stochastic with a zero point diagonal") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nc = 2 + trial % 5, m = 2 + trial % 7;
    const WalkGraph g = build_walk_graph(oracle::random_matrix(nc, 3, rng, 2.0), oracle::random_matrix(m, 3, rng, 2.0), 3);
    for (std::size_t i = 0; i < m; ++i) REQUIRE(g.point_to_point(i, i) == 0.0);
    for (const Matrix* mat : {&g.proto_to_point, &g.point_to_point, &g.point_to_proto, &g.walkers.back()}) {
      for (std::size_t r = 0; r < mat->rows(); ++r) {
        double s = 0.0;
        for (double v : mat->row(r)) {
          REQUIRE(v >= 0.0);
          s += v;
        }
        REQUIRE(std::abs(s - 1.0) <= 1e-9);
      }
    }
  }
}

TEST_CASE("walker loss examples") {
  const Matrix half(2, 2, 0.5);
  CHECK(std::abs(walker_loss(std::vector{half}, 0.7) - std::log(2.0)) <= 1e-12);

  const Matrix t0{{0.6, 0.4}, {0.3, 0.7}};
  const Matrix t1{{0.2, 0.8}, {0.9, 0.1}};
  const double h0 = -(std::log(0.6) + std::log(0.7)) / 2.0;
  CHECK(walker_loss(std::vector{t0, t1, t1}, 0.0) == h0);
  const double h1 = -(std::log(0.2) + std::log(0.1)) / 2.0;
  CHECK(std::abs(walker_loss(std::vector{t0, t1, t1}, 0.5) - (h0 + 0.5 * h1 + 0.25 * h1)) <= 1e-12);
}

TEST_CASE("visit loss examples") {
  CHECK(std::abs(visit_loss(Matrix(3, 4, 0.25)) - std::log(4.0)) <= 1e-12);
  const double eps = 1e-6;
  const Matrix peaked{{1 - 3 * eps, eps, eps, eps}};
  const double expected = -(std::log(1 - 3 * eps) + 3 * std::log(eps)) / 4.0;
  const double v = visit_loss(peaked);
  CHECK(std::abs(v - expected) <= 1e-12);
  CHECK(v == doctest::Approx(10.36).epsilon(1e-3));
  CHECK(v > std::log(4.0));
}

TEST_CASE("total loss examples") {
  const LossBreakdown a = total_loss(1.0, 0.4, 0.2, {3, 0.7, 1.5});
  CHECK(std::abs(a.total - 1.9) <= 1e-12);
  CHECK(std::abs(a.rw - 0.6) <= 1e-12);
  CHECK(total_loss(0.8, 0.4, 0.2, {3, 0.7, 0.0}).total == 0.8);
  CHECK(std::abs(total_loss(0.8, 0.4, 0.2, {3, 0.7, 0.5}).total - (0.8 + 0.5 * 0.6)) <= 1e-12);
}

TEST_CASE("walk losses are equivariant under relabelling and invariant under translation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nc = 2 + trial % 4, m = 2 + trial % 6;
    const Matrix protos = oracle::random_matrix(nc, 3, rng);
    const Matrix points = oracle::random_matrix(m, 3, rng);
    const WalkGraph g = build_walk_graph(protos, points, 2);

    Matrix pp(nc, 3), xp(m, 3), shifted_p = protos, shifted_x = points;
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t k = 0; k < 3; ++k) pp(c, k) = protos(nc - 1 - c, k);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < 3; ++k) xp(j, k) = points((j + 1) % m, k);
    for (std::size_t c = 0; c < nc; ++c) shifted_p(c, 0) += 3.0;
    for (std::size_t j = 0; j < m; ++j) shifted_x(j, 0) += 3.0;

    const WalkGraph gp = build_walk_graph(pp, xp, 2);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t a = 0; a < nc; ++a)
        for (std::size_t b = 0; b < nc; ++b)
          REQUIRE(std::abs(gp.walkers[i](a, b) - g.walkers[i](nc - 1 - a, nc - 1 - b)) <= 1e-10);
    REQUIRE(std::abs(walker_loss(gp.walkers, 0.7) - walker_loss(g.walkers, 0.7)) <= 1e-10);
    REQUIRE(std::abs(visit_loss(gp.proto_to_point) - visit_loss(g.proto_to_point)) <= 1e-10);

    const WalkGraph gs = build_walk_graph(shifted_p, shifted_x, 2);
    REQUIRE(std::abs(walker_loss(gs.walkers, 0.7) - walker_loss(g.walkers, 0.7)) <= 1e-9);
    REQUIRE(std::abs(visit_loss(gs.proto_to_point) - visit_loss(g.proto_to_point)) <= 1e-9);
  }
}

TEST_CASE("walk losses on the tape match the plain-value versions and finite differences") {
  std::mt19937_64 rng(17);
  const std::vector<Matrix> params{oracle::random_matrix(3, 2, rng), oracle::random_matrix(4, 2, rng)};
  auto objective = [](ad::Tape&, ad::Var p, ad::Var x) {
    const WalkTerms w = build_walk_graph(p, x, 2);
    return ad::add(walker_loss(w.walkers, 0.7), visit_loss(w.proto_to_point));
  };
  ad::Tape tape;
  ad::Var p = tape.parameter(params[0]);
  ad::Var x = tape.parameter(params[1]);
  ad::Var loss = objective(tape, p, x);
  const WalkGraph g = build_walk_graph(params[0], params[1], 2);
  CHECK(std::abs(loss.value()(0, 0) - (walker_loss(g.walkers, 0.7) + visit_loss(g.proto_to_point))) <= 1e-12);
  const auto analytic = tape.gradient(loss, std::vector{p, x});
  const auto numeric = oracle::central_differences(
      [&](const std::vector<Matrix>& v) {
        ad::Tape t;
        return objective(t, t.constant(v[0]), t.constant(v[1])).value()(0, 0);
      },
      params);
  CHECK(oracle::max_rel_error(analytic, numeric) <= 1e-4);
}

TEST_CASE("walk graph contract errors") {
  CHECK_THROWS_AS(build_walk_graph(Matrix{{0, 0}, {1, 1}}, Matrix(0, 2), 0), ContractError);
  CHECK_THROWS_AS(build_walk_graph(Matrix{{0, 0}}, Matrix{{1, 1}, {2, 2}}, 0), ContractError);
  CHECK_THROWS_AS(PRWConfig({3, 1.5, 0.5}).validate(), ContractError);
  CHECK_THROWS_AS(PRWConfig({3, 0.7, -1.0}).validate(), ContractError);
}
