#include "prw/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prw/errors.hpp"

namespace prw::ad {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid()) throw ContractError(std::string(op) + ": unbound variable");
  if (a.tape() != b.tape()) throw ContractError(std::string(op) + ": operands live on different tapes");
  return *a.tape();
}

Tape& tape_of(Var a, const char* op) {
  if (!a.valid()) throw ContractError(std::string(op) + ": unbound variable");
  return *a.tape();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": " + shape(a) + " vs " + shape(b));
  }
}

template <typename F>
Matrix map(const Matrix& a, F&& f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <typename F>
Matrix zip(const Matrix& a, const Matrix& b, F&& f) {
  Matrix out(a.rows(), a.cols());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = f(x[i], y[i]);
  return out;
}

// adjoint(dst) += f(g[i], i) elementwise.
template <typename F>
void accumulate_map(Tape& t, std::size_t dst, const Matrix& g, F&& f) {
  if (!t.needs_grad(dst)) return;
  auto out = t.adjoint(dst).data();
  auto src = g.data();
  for (std::size_t i = 0; i < src.size(); ++i) out[i] += f(src[i], i);
}

}  // namespace

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("unbound variable");
  return tape_->value(id_);
}

Var Tape::add_leaf(std::string op, Matrix value, bool needs_grad) {
  const std::size_t id = nodes_.size();
  if (!value.all_finite()) {
    throw NumericError("node #" + std::to_string(id) + " (" + op + "): non-finite leaf value");
  }
  nodes_.push_back(Node{std::move(op), std::move(value), {}, {}, {}, needs_grad});
  return Var(this, id);
}

Var Tape::constant(Matrix value) { return add_leaf("constant", std::move(value), false); }

Var Tape::parameter(Matrix value) { return add_leaf("parameter", std::move(value), true); }

void Tape::check_owned(std::size_t id) const {
  if (id >= nodes_.size()) throw ContractError("node id out of range");
}

Var Tape::push(std::string op, Matrix value, std::vector<std::size_t> inputs, Backprop backprop) {
  const std::size_t id = nodes_.size();
  if (!value.all_finite()) {
    throw NumericError("node #" + std::to_string(id) + " (" + op + "): non-finite value");
  }
  bool needs = false;
  for (auto in : inputs) {
    check_owned(in);
    needs = needs || nodes_[in].needs_grad;
  }
  nodes_.push_back(Node{std::move(op), std::move(value), {}, std::move(inputs),
                        needs ? std::move(backprop) : Backprop{}, needs});
  return Var(this, id);
}

Matrix& Tape::adjoint(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  if (!nodes_[id].needs_grad) return;
  Matrix& dst = adjoint(id);
  require_same_shape(dst, g, "accumulate");
  auto out = dst.data();
  auto src = g.data();
  for (std::size_t i = 0; i < src.size(); ++i) out[i] += src[i];
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw ContractError("backward: root is not on this tape");
  const Matrix& rv = root.value();
  if (rv.rows() != 1 || rv.cols() != 1) {
    throw ContractError("backward: root must be a 1x1 scalar, got " + shape(rv));
  }
  for (auto& n : nodes_) n.grad = Matrix();
  if (!nodes_[root.id()].needs_grad) return;
  adjoint(root.id())(0, 0) = 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backprop || n.grad.empty()) continue;
    n.backprop(*this, id);
    if (!nodes_[id].grad.all_finite()) {
      throw NumericError("node #" + std::to_string(id) + " (" + nodes_[id].op +
                         "): non-finite gradient");
    }
  }
}

std::vector<Matrix> Tape::gradient(Var root, std::span<const Var> wrt) {
  backward(root);
  std::vector<Matrix> out;
  out.reserve(wrt.size());
  for (const Var& v : wrt) out.push_back(grad(v));
  return out;
}

const Matrix& Tape::grad(Var v) {
  if (v.tape() != this) throw ContractError("grad: variable is not on this tape");
  return adjoint(v.id());
}

// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  const auto ia = a.id(), ib = b.id();
  return t.push("add", zip(a.value(), b.value(), [](double x, double y) { return x + y; }), {ia, ib},
                [ia, ib](Tape& t, std::size_t self) {
                  const Matrix& g = t.adjoint(self);
                  t.accumulate(ia, g);
                  t.accumulate(ib, g);
                });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  const auto ia = a.id(), ib = b.id();
  return t.push("sub", zip(a.value(), b.value(), [](double x, double y) { return x - y; }), {ia, ib},
                [ia, ib](Tape& t, std::size_t self) {
                  const Matrix& g = t.adjoint(self);
                  t.accumulate(ia, g);
                  accumulate_map(t, ib, g, [](double gi, std::size_t) { return -gi; });
                });
}

Var mul(Var a, Var b) {
  Tape& t = same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  const auto ia = a.id(), ib = b.id();
  return t.push("mul", zip(a.value(), b.value(), [](double x, double y) { return x * y; }), {ia, ib},
                [ia, ib](Tape& t, std::size_t self) {
                  const Matrix& g = t.adjoint(self);
                  auto av = t.value(ia).data();
                  auto bv = t.value(ib).data();
                  accumulate_map(t, ia, g, [&](double gi, std::size_t k) { return gi * bv[k]; });
                  accumulate_map(t, ib, g, [&](double gi, std::size_t k) { return gi * av[k]; });
                });
}

Var neg(Var a) { return scale(a, -1.0); }

Var scale(Var a, double factor) {
  Tape& t = tape_of(a, "scale");
  const auto ia = a.id();
  return t.push("scale", map(a.value(), [factor](double x) { return x * factor; }), {ia},
                [ia, factor](Tape& t, std::size_t self) {
                  accumulate_map(t, ia, t.adjoint(self),
                                 [factor](double gi, std::size_t) { return gi * factor; });
                });
}

Var add_scalar(Var a, double offset) {
  Tape& t = tape_of(a, "add_scalar");
  const auto ia = a.id();
  return t.push("add_scalar", map(a.value(), [offset](double x) { return x + offset; }), {ia},
                [ia](Tape& t, std::size_t self) { t.accumulate(ia, t.adjoint(self)); });
}

Var square(Var a) {
  Tape& t = tape_of(a, "square");
  const auto ia = a.id();
  return t.push("square", map(a.value(), [](double x) { return x * x; }), {ia},
                [ia](Tape& t, std::size_t self) {
                  auto av = t.value(ia).data();
                  accumulate_map(t, ia, t.adjoint(self),
                                 [&](double gi, std::size_t k) { return 2.0 * av[k] * gi; });
                });
}

Var exp(Var a) {
  Tape& t = tape_of(a, "exp");
  const auto ia = a.id();
  return t.push("exp", map(a.value(), [](double x) { return std::exp(x); }), {ia},
                [ia](Tape& t, std::size_t self) {
                  auto yv = t.value(self).data();
                  accumulate_map(t, ia, t.adjoint(self),
                                 [&](double gi, std::size_t k) { return gi * yv[k]; });
                });
}

Var log(Var a) {
  Tape& t = tape_of(a, "log");
  const auto ia = a.id();
  return t.push("log", map(a.value(), [](double x) { return std::log(x); }), {ia},
                [ia](Tape& t, std::size_t self) {
                  auto av = t.value(ia).data();
                  accumulate_map(t, ia, t.adjoint(self),
                                 [&](double gi, std::size_t k) { return gi / av[k]; });
                });
}

Var log_floor(Var a, double floor, ClampCounter* counter) {
  Tape& t = tape_of(a, "log_floor");
  const auto ia = a.id();
  std::size_t clamped = 0;
  Matrix out = map(a.value(), [&](double x) {
    if (x <= floor) {
      ++clamped;
      return std::log(floor);
    }
    return std::log(x);
  });
  if (counter != nullptr) counter->count += clamped;
  return t.push("log_floor", std::move(out), {ia}, [ia, floor](Tape& t, std::size_t self) {
    auto av = t.value(ia).data();
    accumulate_map(t, ia, t.adjoint(self),
                   [&](double gi, std::size_t k) { return av[k] <= floor ? 0.0 : gi / av[k]; });
  });
}

Var reciprocal(Var a) {
  Tape& t = tape_of(a, "reciprocal");
  const auto ia = a.id();
  return t.push("reciprocal", map(a.value(), [](double x) { return 1.0 / x; }), {ia},
                [ia](Tape& t, std::size_t self) {
                  auto yv = t.value(self).data();
                  accumulate_map(t, ia, t.adjoint(self),
                                 [&](double gi, std::size_t k) { return -gi * yv[k] * yv[k]; });
                });
}

Var relu(Var a) {
  Tape& t = tape_of(a, "relu");
  const auto ia = a.id();
  return t.push("relu", map(a.value(), [](double x) { return x > 0.0 ? x : 0.0; }), {ia},
                [ia](Tape& t, std::size_t self) {
                  auto av = t.value(ia).data();
                  accumulate_map(t, ia, t.adjoint(self),
                                 [&](double gi, std::size_t k) { return av[k] > 0.0 ? gi : 0.0; });
                });
}

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const auto ia = a.id(), ib = b.id();
  return t.push("matmul", prw::matmul(a.value(), b.value()), {ia, ib},
                [ia, ib](Tape& t, std::size_t self) {
                  const Matrix& g = t.adjoint(self);
                  if (t.needs_grad(ia)) t.accumulate(ia, prw::matmul(g, prw::transpose(t.value(ib))));
                  if (t.needs_grad(ib)) t.accumulate(ib, prw::matmul(prw::transpose(t.value(ia)), g));
                });
}

Var transpose(Var a) {
  Tape& t = tape_of(a, "transpose");
  const auto ia = a.id();
  return t.push("transpose", prw::transpose(a.value()), {ia}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, prw::transpose(t.adjoint(self)));
  });
}

Var softmax_rows(Var a, const Mask* mask) {
  Tape& t = tape_of(a, "softmax_rows");
  const auto ia = a.id();
  return t.push("softmax_rows", prw::softmax_rows(a.value(), mask), {ia},
                [ia](Tape& t, std::size_t self) {
                  if (!t.needs_grad(ia)) return;
                  const Matrix& y = t.value(self);
                  const Matrix& g = t.adjoint(self);
                  Matrix& dst = t.adjoint(ia);
                  for (std::size_t i = 0; i < y.rows(); ++i) {
                    double dot = 0.0;
                    for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
                    for (std::size_t j = 0; j < y.cols(); ++j) dst(i, j) += y(i, j) * (g(i, j) - dot);
                  }
                });
}

Var pairwise_sq_dist(Var x, Var y) {
  Tape& t = same_tape(x, y, "pairwise_sq_dist");
  const auto ix = x.id(), iy = y.id();
  return t.push("pairwise_sq_dist", prw::pairwise_sq_dist(x.value(), y.value()), {ix, iy},
                [ix, iy](Tape& t, std::size_t self) {
                  const Matrix& g = t.adjoint(self);
                  const Matrix& xv = t.value(ix);
                  const Matrix& yv = t.value(iy);
                  const std::size_t d = xv.cols();
                  // d/dx_i = 2 sum_j g_ij (x_i - y_j); d/dy_j = -2 sum_i g_ij (x_i - y_j)
                  Matrix dx(xv.rows(), d);
                  Matrix dy(yv.rows(), d);
                  for (std::size_t i = 0; i < xv.rows(); ++i) {
                    for (std::size_t j = 0; j < yv.rows(); ++j) {
                      const double gij = 2.0 * g(i, j);
                      if (gij == 0.0) continue;
                      for (std::size_t k = 0; k < d; ++k) {
                        const double diff = gij * (xv(i, k) - yv(j, k));
                        dx(i, k) += diff;
                        dy(j, k) -= diff;
                      }
                    }
                  }
                  t.accumulate(ix, dx);
                  t.accumulate(iy, dy);
                });
}

Var sum_all(Var a) {
  Tape& t = tape_of(a, "sum_all");
  const auto ia = a.id();
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return t.push("sum_all", Matrix(1, 1, total), {ia}, [ia](Tape& t, std::size_t self) {
    const double g = t.adjoint(self)(0, 0);
    if (!t.needs_grad(ia)) return;
    for (double& v : t.adjoint(ia).data()) v += g;
  });
}

Var sum_rows(Var a) {
  Tape& t = tape_of(a, "sum_rows");
  const auto ia = a.id();
  const Matrix& av = a.value();
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (double v : av.row(i)) out(i, 0) += v;
  return t.push("sum_rows", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    if (!t.needs_grad(ia)) return;
    const Matrix& g = t.adjoint(self);
    Matrix& dst = t.adjoint(ia);
    for (std::size_t i = 0; i < dst.rows(); ++i)
      for (double& v : dst.row(i)) v += g(i, 0);
  });
}

Var sum_cols(Var a) {
  Tape& t = tape_of(a, "sum_cols");
  const auto ia = a.id();
  const Matrix& av = a.value();
  Matrix out(1, av.cols());
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
  return t.push("sum_cols", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    if (!t.needs_grad(ia)) return;
    const Matrix& g = t.adjoint(self);
    Matrix& dst = t.adjoint(ia);
    for (std::size_t i = 0; i < dst.rows(); ++i)
      for (std::size_t j = 0; j < dst.cols(); ++j) dst(i, j) += g(0, j);
  });
}

Var mean_all(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ContractError("mean_all: empty matrix");
  return scale(sum_all(a), 1.0 / static_cast<double>(n));
}

Var diagonal(Var a) {
  Tape& t = tape_of(a, "diagonal");
  const Matrix& av = a.value();
  if (av.rows() != av.cols()) throw DimensionError("diagonal: matrix is " + shape(av));
  const auto ia = a.id();
  Matrix out(av.rows(), 1);
  for (std::size_t i = 0; i < av.rows(); ++i) out(i, 0) = av(i, i);
  return t.push("diagonal", std::move(out), {ia}, [ia](Tape& t, std::size_t self) {
    if (!t.needs_grad(ia)) return;
    const Matrix& g = t.adjoint(self);
    Matrix& dst = t.adjoint(ia);
    for (std::size_t i = 0; i < g.rows(); ++i) dst(i, i) += g(i, 0);
  });
}

Var add_row_broadcast(Var a, Var row) {
  Tape& t = same_tape(a, row, "add_row_broadcast");
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw DimensionError("add_row_broadcast: " + shape(av) + " + " + shape(rv));
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += rv(0, j);
  const auto ia = a.id(), ir = row.id();
  return t.push("add_row_broadcast", std::move(out), {ia, ir}, [ia, ir](Tape& t, std::size_t self) {
    const Matrix& g = t.adjoint(self);
    t.accumulate(ia, g);
    if (!t.needs_grad(ir)) return;
    Matrix& dst = t.adjoint(ir);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) dst(0, j) += g(i, j);
  });
}

Var scale_rows(Var a, Var s) {
  Tape& t = same_tape(a, s, "scale_rows");
  const Matrix& av = a.value();
  const Matrix& sv = s.value();
  if (sv.cols() != 1 || sv.rows() != av.rows()) {
    throw DimensionError("scale_rows: " + shape(av) + " by " + shape(sv));
  }
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (double& v : out.row(i)) v *= sv(i, 0);
  const auto ia = a.id(), is = s.id();
  return t.push("scale_rows", std::move(out), {ia, is}, [ia, is](Tape& t, std::size_t self) {
    const Matrix& g = t.adjoint(self);
    const Matrix& av = t.value(ia);
    const Matrix& sv = t.value(is);
    if (t.needs_grad(ia)) {
      Matrix& da = t.adjoint(ia);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) da(i, j) += g(i, j) * sv(i, 0);
    }
    if (t.needs_grad(is)) {
      Matrix& ds = t.adjoint(is);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) ds(i, 0) += g(i, j) * av(i, j);
    }
  });
}

}  // namespace prw::ad
