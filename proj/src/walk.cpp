#include "prw/walk.hpp"

#include <cmath>
#include <string>

#include "prw/errors.hpp"
#include "prw/protonet.hpp"

namespace prw {

void PRWConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must be in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("lambda must be >= 0");
}

std::vector<ad::Var> walker_matrices(ad::Var proto_to_point, ad::Var point_to_point,
                                     ad::Var point_to_proto, std::size_t tau) {
  if (tau > 0 && !point_to_point.valid()) {
    throw ContractError("walker_matrices: tau >= 1 needs point-to-point transitions");
  }
  std::vector<ad::Var> out;
  out.reserve(tau + 1);
  ad::Var reach = proto_to_point;  // [N_c x M] distribution after the last point step
  out.push_back(ad::matmul(reach, point_to_proto));
  for (std::size_t i = 1; i <= tau; ++i) {
    reach = ad::matmul(reach, point_to_point);
    out.push_back(ad::matmul(reach, point_to_proto));
  }
  return out;
}

std::vector<Matrix> walker_matrices(const Matrix& proto_to_point, const Matrix& point_to_point,
                                    const Matrix& point_to_proto, std::size_t tau) {
  ad::Tape tape;
  ad::Var x2x = tau > 0 ? tape.constant(point_to_point) : ad::Var{};
  auto vars = walker_matrices(tape.constant(proto_to_point), x2x, tape.constant(point_to_proto), tau);
  std::vector<Matrix> out;
  for (const auto& v : vars) out.push_back(v.value());
  return out;
}

WalkTerms build_walk_graph(ad::Var protos, ad::Var unlabeled, std::size_t tau) {
  const std::size_t m = unlabeled.rows();
  if (m == 0) throw ContractError("walk graph needs at least one unlabeled point");
  if (protos.rows() < 2) throw ContractError("walk graph needs at least two prototypes");
  if (m == 1 && tau >= 1) {
    throw DegenerateError("walk graph with a single unlabeled point has no point-to-point step; use tau = 0");
  }
  WalkTerms w;
  w.affinity_proto = ad::neg(ad::pairwise_sq_dist(unlabeled, protos));
  w.proto_to_point = ad::softmax_rows(ad::transpose(w.affinity_proto));
  w.point_to_proto = ad::softmax_rows(w.affinity_proto);
  if (tau > 0) {
    const Mask mask = Mask::diagonal(m);
    w.affinity_point = ad::neg(ad::pairwise_sq_dist(unlabeled, unlabeled));
    w.point_to_point = ad::softmax_rows(w.affinity_point, &mask);
  }
  w.walkers = walker_matrices(w.proto_to_point, w.point_to_point, w.point_to_proto, tau);
  return w;
}

WalkGraph snapshot(const WalkTerms& terms) {
  WalkGraph g;
  g.affinity_proto = terms.affinity_proto.value();
  if (terms.affinity_point.valid()) g.affinity_point = terms.affinity_point.value();
  g.proto_to_point = terms.proto_to_point.value();
  if (terms.point_to_point.valid()) g.point_to_point = terms.point_to_point.value();
  g.point_to_proto = terms.point_to_proto.value();
  for (const auto& t : terms.walkers) g.walkers.push_back(t.value());
  return g;
}

WalkGraph build_walk_graph(const Matrix& protos, const Matrix& unlabeled, std::size_t tau) {
  ad::Tape tape;
  return snapshot(build_walk_graph(tape.constant(protos), tape.constant(unlabeled), tau));
}

ad::Var walker_loss(std::span<const ad::Var> walkers, double alpha, ClampCounter* clamps) {
  if (walkers.empty()) throw ContractError("walker_loss: empty walker sequence");
  ad::Var total;
  double weight = 1.0;  // alpha^0
  for (std::size_t i = 0; i < walkers.size(); ++i, weight *= alpha) {
    if (weight == 0.0) continue;
    const ad::Var& t = walkers[i];
    const double n = static_cast<double>(t.rows());
    ad::Var h = ad::scale(ad::sum_all(ad::log_floor(ad::diagonal(t), kLogFloor, clamps)), -weight / n);
    total = total.valid() ? ad::add(total, h) : h;
  }
  return total;
}

double walker_loss(std::span<const Matrix> walkers, double alpha, ClampCounter* clamps) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& t : walkers) vars.push_back(tape.constant(t));
  return walker_loss(vars, alpha, clamps).value()(0, 0);
}

ad::Var visit_loss(ad::Var proto_to_point, ClampCounter* clamps) {
  const double n_protos = static_cast<double>(proto_to_point.rows());
  const double n_points = static_cast<double>(proto_to_point.cols());
  ad::Var visit = ad::scale(ad::sum_cols(proto_to_point), 1.0 / n_protos);
  return ad::scale(ad::sum_all(ad::log_floor(visit, kLogFloor, clamps)), -1.0 / n_points);
}

double visit_loss(const Matrix& proto_to_point, ClampCounter* clamps) {
  ad::Tape tape;
  return visit_loss(tape.constant(proto_to_point), clamps).value()(0, 0);
}

std::vector<double> visit_distribution(const Matrix& proto_to_point) {
  std::vector<double> p(proto_to_point.cols(), 0.0);
  for (std::size_t c = 0; c < proto_to_point.rows(); ++c)
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += proto_to_point(c, j);
  for (auto& v : p) v /= static_cast<double>(proto_to_point.rows());
  return p;
}

LossBreakdown total_loss(double supervised, double walker, double visit, const PRWConfig& config) {
  LossBreakdown b;
  b.supervised = supervised;
  b.walker = walker;
  b.visit = visit;
  b.rw = walker + visit;
  b.total = supervised + config.lambda * b.rw;
  b.lambda = config.lambda;
  b.alpha = config.alpha;
  return b;
}

}  // namespace prw
