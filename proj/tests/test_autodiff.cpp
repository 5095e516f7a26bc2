#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "prw/autodiff.hpp"
#include "prw/errors.hpp"

using namespace prw;

TEST_CASE("pairwise_sq_dist examples") {
  CHECK(pairwise_sq_dist(Matrix{{0, 0}}, Matrix{{3, 4}})(0, 0) == 25.0);
  CHECK(pairwise_sq_dist(Matrix{{1, 2}}, Matrix{{1, 2}})(0, 0) == 0.0);

  std::mt19937_64 rng(11);
  const Matrix x = oracle::random_matrix(3, 2, rng);
  const Matrix y = oracle::random_matrix(2, 2, rng);
  CHECK(oracle::max_abs_diff(pairwise_sq_dist(x, y), oracle::sq_dist_loops(x, y)) <= 1e-12);

  CHECK_THROWS_AS(pairwise_sq_dist(Matrix(2, 3), Matrix(2, 2)), DimensionError);
}

TEST_CASE("pairwise_sq_dist of a set with itself is symmetric with zero diagonal") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix x = oracle::random_matrix(1 + trial % 7, 1 + trial % 5, rng, 10.0);
    const Matrix d = pairwise_sq_dist(x, x);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      REQUIRE(d(i, i) == 0.0);
      for (std::size_t j = 0; j < d.cols(); ++j) REQUIRE(std::abs(d(i, j) - d(j, i)) <= 1e-12);
    }
  }
}

TEST_CASE("softmax_rows examples") {
  const Matrix half = softmax_rows(Matrix{{0, 0}});
  CHECK(half(0, 0) == 0.5);
  CHECK(half(0, 1) == 0.5);

  Mask mask(1, 2);
  mask.set(0, 1);
  const Matrix single = softmax_rows(Matrix{{0, 0}}, &mask);
  CHECK(single(0, 0) == 1.0);
  CHECK(single(0, 1) == 0.0);

  const Matrix direct = oracle::softmax_direct(Matrix{{1, 2, 3}});
  CHECK(oracle::max_abs_diff(softmax_rows(Matrix{{1, 2, 3}}), direct) <= 1e-12);
}

TEST_CASE("softmax_rows rejects degenerate rows") {
  Mask all(1, 2);
  all.set(0, 0);
  all.set(0, 1);
  CHECK_THROWS_AS(softmax_rows(Matrix{{1, 2}}, &all), DegenerateError);
  CHECK_THROWS_AS(softmax_rows(Matrix(1, 2, std::numeric_limits<double>::infinity())), NumericError);
}

TEST_CASE("softmax rows are distributions and shift invariant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-1e3, 1e3);
  for (int trial = 0; trial < 300; ++trial) {
    const Matrix m = oracle::random_matrix(1 + trial % 6, 1 + trial % 9, rng, 20.0);
    const Matrix s = softmax_rows(m);
    Matrix shifted = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double c = shift(rng);
      for (auto& v : shifted.row(i)) v += c;
    }
    const Matrix t = softmax_rows(shifted);
    for (std::size_t i = 0; i < s.rows(); ++i) {
      double total = 0.0;
      for (double v : s.row(i)) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        total += v;
      }
      REQUIRE(std::abs(total - 1.0) <= 1e-9);
    }
    REQUIRE(oracle::max_abs_diff(s, t) <= 1e-9);
  }
}

TEST_CASE("gradient of x^2 at 3 is 6") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Matrix{{3.0}});
  const auto g = tape.gradient(ad::square(x), std::vector{x});
  CHECK(g[0](0, 0) == 6.0);
}

TEST_CASE("softmax cross-entropy gradient matches central differences") {
  const Matrix logits{{0.3, -1.2, 2.0}};
  const Matrix target{{0.0, 1.0, 0.0}};
  auto loss = [&](ad::Tape& t, ad::Var z) {
    return ad::neg(ad::sum_all(ad::mul(ad::log(ad::softmax_rows(z)), t.constant(target))));
  };
  ad::Tape tape;
  ad::Var z = tape.parameter(logits);
  const auto analytic = tape.gradient(loss(tape, z), std::vector{z});
  const auto numeric = oracle::central_differences(
      [&](const std::vector<Matrix>& p) {
        ad::Tape t;
        return loss(t, t.constant(p[0])).value()(0, 0);
      },
      {logits});
  CHECK(oracle::max_rel_error(analytic, numeric) <= 1e-6);
}

TEST_CASE("backward requires a scalar root") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(tape.backward(ad::square(x)), ContractError);
}

TEST_CASE("non-finite intermediate names the node") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Matrix{{-1.0}});
  try {
    ad::log(x);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("log") != std::string::npos);
    CHECK(std::string(e.what()).find("#1") != std::string::npos);
  }
}

TEST_CASE("log_floor clamps and counts") {
  ad::Tape tape;
  ClampCounter clamps;
  ad::Var x = tape.parameter(Matrix{{0.0, 0.5}});
  ad::Var y = ad::sum_all(ad::log_floor(x, 1e-12, &clamps));
  CHECK(clamps.count == 1);
  CHECK(y.value()(0, 0) == doctest::Approx(std::log(1e-12) + std::log(0.5)));
  const auto g = tape.gradient(y, std::vector{x});
  CHECK(g[0](0, 0) == 0.0);
  CHECK(g[0](0, 1) == doctest::Approx(2.0));
}

TEST_CASE("masked softmax gives exact zeros and zero gradient there") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Matrix{{0.1, 0.4, -0.3}, {1.0, 0.2, 0.0}});
  const Mask mask = [] {
    Mask m(2, 3);
    m.set(0, 0);
    m.set(1, 1);
    return m;
  }();
  ad::Var s = ad::softmax_rows(x, &mask);
  CHECK(s.value()(0, 0) == 0.0);
  CHECK(s.value()(1, 1) == 0.0);
  ad::Var loss = ad::sum_all(ad::mul(s, tape.constant(Matrix{{1, 2, 3}, {4, 5, 6}})));
  const auto g = tape.gradient(loss, std::vector{x});
  CHECK(g[0](0, 0) == 0.0);
  CHECK(g[0](1, 1) == 0.0);
}

namespace {

// A random scalar graph over two 3x3 parameters. The op sequence depends only
// on `seed`, so the same graph can be rebuilt for finite differences. Values
// are renormalised through a softmax whenever they grow large.
ad::Var random_graph(ad::Tape& tape, ad::Var a, ad::Var b, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ad::Var> pool{a, b};
  std::uniform_int_distribution<int> op_pick(0, 10);
  const int depth = 1 + static_cast<int>(rng() % 8);
  auto pick = [&] { return pool[rng() % pool.size()]; };
  for (int d = 0; d < depth; ++d) {
    ad::Var x = pick(), y = pick(), r;
    switch (op_pick(rng)) {
      case 0: r = ad::add(x, y); break;
      case 1: r = ad::sub(x, y); break;
      case 2: r = ad::mul(x, y); break;
      case 3: r = ad::matmul(x, y); break;
      case 4: r = ad::transpose(x); break;
      case 5: r = ad::softmax_rows(x); break;
      case 6: r = ad::square(x); break;
      case 7: r = ad::exp(ad::softmax_rows(x)); break;
      case 8: r = ad::log(ad::add_scalar(ad::softmax_rows(x), 0.1)); break;
      case 9: r = ad::pairwise_sq_dist(x, y); break;
      default: r = ad::scale_rows(x, ad::sum_rows(ad::softmax_rows(y))); break;
    }
    double peak = 0.0;
    for (double v : r.value().data()) peak = std::max(peak, std::abs(v));
    if (peak > 5.0) r = ad::softmax_rows(r);
    pool.push_back(r);
  }
  Matrix weights(3, 3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& w : weights.data()) w = n(rng);
  return ad::sum_all(ad::mul(pool.back(), tape.constant(weights)));
}

}  // namespace

TEST_CASE("random composed graphs match central differences") {
  std::mt19937_64 rng(2024);
  for (std::uint64_t instance = 0; instance < 120; ++instance) {
    const std::vector<Matrix> params{oracle::random_matrix(3, 3, rng), oracle::random_matrix(3, 3, rng)};
    ad::Tape tape;
    ad::Var a = tape.parameter(params[0]);
    ad::Var b = tape.parameter(params[1]);
    const auto analytic = tape.gradient(random_graph(tape, a, b, instance), std::vector{a, b});
    const auto numeric = oracle::central_differences(
        [&](const std::vector<Matrix>& p) {
          ad::Tape t;
          return random_graph(t, t.constant(p[0]), t.constant(p[1]), instance).value()(0, 0);
        },
        params);
    INFO("instance " << instance);
    CHECK(oracle::max_rel_error(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("relu passes gradient only where active") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Matrix{{-2.0, 3.0}});
  const auto g = tape.gradient(ad::sum_all(ad::relu(x)), std::vector{x});
  CHECK(g[0](0, 0) == 0.0);
  CHECK(g[0](0, 1) == 1.0);
}
