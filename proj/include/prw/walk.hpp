#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prw/autodiff.hpp"
#include "prw/matrix.hpp"

namespace prw {

// Random-walk hyperparameters: tau steps among unlabelled points, decay alpha
// on the per-length walker terms, weight lambda on the whole walk loss.
struct PRWConfig {
  std::size_t tau = 3;
  double alpha = 0.7;
  double lambda = 0.5;

  void validate() const;
};

// Differentiable walk graph over N_c prototypes and M unlabelled embeddings.
//   affinity_proto  A  [M x N_c]  A(i,j) = -||h_i - p_j||^2
//   affinity_point  B  [M x M]    B(i,j) = -||h_i - h_j||^2, diagonal masked
//   proto_to_point     [N_c x M]  softmax_rows(A^T)
//   point_to_point     [M x M]    softmax_rows(B), zero diagonal (absent when tau = 0)
//   point_to_proto     [M x N_c]  softmax_rows(A)
//   walkers[i]         [N_c x N_c] proto_to_point * point_to_point^i * point_to_proto
struct WalkTerms {
  ad::Var affinity_proto;
  ad::Var affinity_point;
  ad::Var proto_to_point;
  ad::Var point_to_point;
  ad::Var point_to_proto;
  std::vector<ad::Var> walkers;
};

// Plain-value snapshot of WalkTerms, retained for analysis.
struct WalkGraph {
  Matrix affinity_proto;
  Matrix affinity_point;
  Matrix proto_to_point;
  Matrix point_to_point;
  Matrix point_to_proto;
  std::vector<Matrix> walkers;

  std::size_t n_prototypes() const { return proto_to_point.rows(); }
  std::size_t n_points() const { return proto_to_point.cols(); }
  std::size_t tau() const { return walkers.size() - 1; }
};

// Throws DegenerateError when M = 1 and tau >= 1 (the masked point-to-point
// row would be empty) and ContractError when M = 0 or N_c < 2.
WalkTerms build_walk_graph(ad::Var protos, ad::Var unlabeled, std::size_t tau);
WalkGraph build_walk_graph(const Matrix& protos, const Matrix& unlabeled, std::size_t tau);

// Walker matrices from explicit transition matrices. `point_to_point` may be
// unbound when tau = 0.
std::vector<ad::Var> walker_matrices(ad::Var proto_to_point, ad::Var point_to_point,
                                     ad::Var point_to_proto, std::size_t tau);
std::vector<Matrix> walker_matrices(const Matrix& proto_to_point, const Matrix& point_to_point,
                                    const Matrix& point_to_proto, std::size_t tau);

WalkGraph snapshot(const WalkTerms& terms);

// sum_i alpha^i * H(I, T_i), H(I, T) = -(1/N_c) sum_c log T(c,c), with
// alpha^0 = 1. Terms whose weight is zero are skipped.
ad::Var walker_loss(std::span<const ad::Var> walkers, double alpha, ClampCounter* clamps = nullptr);
double walker_loss(std::span<const Matrix> walkers, double alpha, ClampCounter* clamps = nullptr);

// Cross-entropy of the uniform target against P, the mean of the
// proto_to_point rows: -(1/M) sum_j log P_j.
ad::Var visit_loss(ad::Var proto_to_point, ClampCounter* clamps = nullptr);
double visit_loss(const Matrix& proto_to_point, ClampCounter* clamps = nullptr);

// Mean row of proto_to_point: the first-step visit distribution over points.
std::vector<double> visit_distribution(const Matrix& proto_to_point);

struct LossBreakdown {
  double supervised = 0.0;
  double walker = 0.0;
  double visit = 0.0;
  double rw = 0.0;     // walker + visit
  double total = 0.0;  // supervised + lambda * rw
  double lambda = 0.0;
  double alpha = 0.0;
};

LossBreakdown total_loss(double supervised, double walker, double visit, const PRWConfig& config);

}  // namespace prw
