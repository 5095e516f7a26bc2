#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prw/errors.hpp"
#include "prw/protonet.hpp"

using namespace prw;

namespace {

Matrix reference_embed(const EmbeddingNet& net, const Matrix& x) {
  Matrix h = x;
  const auto& p = net.params();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const Matrix& w = p[2 * l];
    const Matrix& b = p[2 * l + 1];
    Matrix out(h.rows(), w.cols());
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t j = 0; j < w.cols(); ++j) {
        double s = b(0, j);
        for (std::size_t k = 0; k < w.rows(); ++k) s += h(i, k) * w(k, j);
        out(i, j) = (l + 1 < net.num_layers()) ? std::max(0.0, s) : s;
      }
    h = out;
  }
  return h;
}

}  // namespace

TEST_CASE("embed examples") {
  const EmbeddingNet zero({3, 4, 2});
  const Matrix out = zero.embed(Matrix{{1, 2, 3}, {-1, 0, 5}});
  for (double v : out.data()) CHECK(v == 0.0);

  EmbeddingNet id({3, 3});
  id.params()[0] = Matrix::identity(3);
  const Matrix x{{1.5, -2, 3}};
  CHECK(id.embed(x) == x);

  std::mt19937_64 rng(8);
  const auto net = EmbeddingNet::initialized({6, 10, 7, 3}, 5);
  const Matrix batch = oracle::random_matrix(9, 6, rng);
  CHECK(oracle::max_abs_diff(net.embed(batch), reference_embed(net, batch)) <= 1e-10);

  ad::Tape tape;
  const auto bound = net.bind(tape, false);
  CHECK(oracle::max_abs_diff(net.embed(bound, tape.constant(batch)).value(), net.embed(batch)) <= 1e-12);
  CHECK(net.parameter_count() == 6 * 10 + 10 + 10 * 7 + 7 + 7 * 3 + 3);
}

TEST_CASE("compute_prototypes examples") {
  const Matrix one{{1, 2}, {3, 4}};
  const std::vector<std::size_t> labels{0, 1};
  CHECK(compute_prototypes(one, labels, 2) == one);

  const std::vector<std::size_t> same{0, 0, 1};
  const Matrix mid = compute_prototypes(Matrix{{0, 0}, {2, 2}, {5, 5}}, same, 2);
  CHECK(mid(0, 0) == 1.0);
  CHECK(mid(0, 1) == 1.0);

  std::mt19937_64 rng(2);
  const Matrix five = oracle::random_matrix(5, 4, rng);
  const std::vector<std::size_t> zeros(5, 0);
  const Matrix p = compute_prototypes(five, zeros, 1);
  for (std::size_t k = 0; k < 4; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += five(i, k);
    CHECK(std::abs(p(0, k) - s / 5.0) <= 1e-12);
  }

  CHECK_THROWS_AS(compute_prototypes(one, std::vector<std::size_t>{0, 0}, 2), ContractError);
}

TEST_CASE("classify examples") {
  const Matrix protos{{-1, 0}, {1, 0}};
  const Matrix half = classify(Matrix{{0, 5}}, protos);
  CHECK(half(0, 0) == doctest::Approx(0.5));
  CHECK(half(0, 1) == doctest::Approx(0.5));

  const double r = 1.0;
  const Matrix tri{{r, 0}, {-r / 2, r * std::sqrt(3.0) / 2}, {-r / 2, -r * std::sqrt(3.0) / 2}};
  const Matrix third = classify(Matrix{{0, 0}}, tri);
  for (std::size_t c = 0; c < 3; ++c) CHECK(third(0, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const Matrix q = classify(Matrix{{0, 0}}, Matrix{{0, 0}, {std::sqrt(std::log(3.0)), 0}});
  CHECK(std::abs(q(0, 0) - 0.75) <= 1e-12);
  CHECK(std::abs(q(0, 1) - 0.25) <= 1e-12);
}

TEST_CASE("supervised_loss examples") {
  const std::vector<std::size_t> labels{0, 1};
  CHECK(supervised_loss(Matrix{{1, 0}, {0, 1}}, labels) == 0.0);

  const Matrix uniform(3, 5, 0.2);
  CHECK(std::abs(supervised_loss(uniform, std::vector<std::size_t>{0, 3, 4}) - std::log(5.0)) <= 1e-12);

  CHECK(std::abs(supervised_loss(Matrix{{0.75, 0.25}}, std::vector<std::size_t>{0}) - (-std::log(0.75))) <= 1e-12);
  CHECK(supervised_loss(Matrix{{0.75, 0.25}}, std::vector<std::size_t>{0}) == doctest::Approx(0.2877).epsilon(1e-4));

  ClampCounter clamps;
  const double floored = supervised_loss(Matrix{{1, 0}}, std::vector<std::size_t>{1}, &clamps);
  CHECK(clamps.count == 1);
  CHECK(floored == doctest::Approx(-std::log(kLogFloor)));
}

TEST_CASE("refine_prototypes examples") {
  const Matrix protos{{-1, 0}, {1, 0}};
  const Matrix labeled{{-1, 0}, {1, 0}};
  const std::vector<std::size_t> labels{0, 1};
  CHECK(refine_prototypes(protos, labeled, labels, Matrix(0, 2)) == protos);

  const Matrix refined = refine_prototypes(protos, labeled, labels, Matrix{{0, 4}});
  // Each class: (labeled point + 0.5 * unlabeled point) / 1.5
  CHECK(std::abs(refined(0, 0) - (-1.0 / 1.5)) <= 1e-10);
  CHECK(std::abs(refined(0, 1) - (2.0 / 1.5)) <= 1e-10);
  CHECK(std::abs(refined(1, 0) - (1.0 / 1.5)) <= 1e-10);
  CHECK(std::abs(refined(1, 1) - (2.0 / 1.5)) <= 1e-10);

  const Matrix far_protos{{0, 0}, {10, 0}, {0, 10}};
  const Matrix far_labeled{{0.3, 0}, {-0.3, 0}, {10, 0}, {0, 10}};
  const std::vector<std::size_t> far_labels{0, 0, 1, 2};
  const Matrix moved = refine_prototypes(far_protos, far_labeled, far_labels, Matrix{{0, 0}});
  CHECK(std::hypot(moved(0, 0), moved(0, 1)) < 1e-3);
}

TEST_CASE("prototype-based classification is permutation and translation invariant") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t nc = 2 + trial % 4;
    const Matrix support = oracle::random_matrix(2 * nc, 3, rng);
    std::vector<std::size_t> labels(2 * nc);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % nc;
    const Matrix query = oracle::random_matrix(4, 3, rng);
    const Matrix probs = classify(query, compute_prototypes(support, labels, nc));

    // Reverse the support order: same prototypes.
    Matrix rev(support.rows(), 3);
    std::vector<std::size_t> rev_labels(labels.rbegin(), labels.rend());
    for (std::size_t i = 0; i < support.rows(); ++i)
      for (std::size_t k = 0; k < 3; ++k) rev(i, k) = support(support.rows() - 1 - i, k);
    REQUIRE(oracle::max_abs_diff(classify(query, compute_prototypes(rev, rev_labels, nc)), probs) <= 1e-12);

    // Translate everything.
    Matrix s2 = support, q2 = query;
    for (std::size_t i = 0; i < s2.rows(); ++i) s2(i, 1) += 7.5;
    for (std::size_t i = 0; i < q2.rows(); ++i) q2(i, 1) += 7.5;
    REQUIRE(oracle::max_abs_diff(classify(q2, compute_prototypes(s2, labels, nc)), probs) <= 1e-9);
  }
}

TEST_CASE("argmax_rows") {
  const auto a = argmax_rows(Matrix{{0.1, 0.7, 0.2}, {0.5, 0.2, 0.3}});
  CHECK(a == std::vector<std::size_t>{1, 0});
}
