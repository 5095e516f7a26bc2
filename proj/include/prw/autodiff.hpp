#pragma once

// Tape-based reverse-mode differentiation over dense matrices.
//
// Every op appends a node to the tape; node ids increase monotonically and a
// node only references lower ids, so the tape is a topological order and
// backward() walks it once in reverse. Forward values are checked for
// finiteness as they are produced; a NaN/inf raises NumericError naming the
// node and op.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "prw/matrix.hpp"

namespace prw {

// Counts log arguments that hit the floor in log_floor().
struct ClampCounter {
  std::size_t count = 0;
};

namespace ad {

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that never receives a gradient.
  Var constant(Matrix value);
  // Leaf whose gradient is collected by backward().
  Var parameter(Matrix value);

  // Appends an interior node. `inputs` must already be on this tape.
  Var push(std::string op, Matrix value, std::vector<std::size_t> inputs, Backprop backprop);

  // Seeds d(root)/d(root) = 1 and propagates adjoints. The root must be 1x1.
  void backward(Var root);

  // Convenience: backward(root), then the gradients of `wrt` in order.
  std::vector<Matrix> gradient(Var root, std::span<const Var> wrt);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  // Gradient of the last backward() root w.r.t. this node (zeros if untouched).
  const Matrix& grad(Var v);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  void accumulate(std::size_t id, const Matrix& g);
  // Adjoint buffer for in-place accumulation; allocated on first use.
  Matrix& adjoint(std::size_t id);

  std::size_t size() const { return nodes_.size(); }
  const std::string& op_name(std::size_t id) const { return nodes_[id].op; }

 private:
  struct Node {
    std::string op;
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> inputs;
    Backprop backprop;
    bool needs_grad = false;
  };

  Var add_leaf(std::string op, Matrix value, bool needs_grad);
  void check_owned(std::size_t id) const;

  std::vector<Node> nodes_;
};

// Elementwise and structural ops. Binary ops require equal shapes unless noted.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var square(Var a);
Var exp(Var a);
Var log(Var a);
// log(max(x, floor)); entries at or below the floor get zero gradient and are
// tallied in `counter` when one is supplied.
Var log_floor(Var a, double floor, ClampCounter* counter = nullptr);
Var reciprocal(Var a);
Var relu(Var a);

Var matmul(Var a, Var b);
Var transpose(Var a);
Var softmax_rows(Var a, const Mask* mask = nullptr);
Var pairwise_sq_dist(Var x, Var y);

Var sum_all(Var a);    // -> 1x1
Var sum_rows(Var a);   // n x m -> n x 1
Var sum_cols(Var a);   // n x m -> 1 x m
Var mean_all(Var a);   // -> 1x1
Var diagonal(Var a);   // n x n -> n x 1

// a (n x m) + row (1 x m) broadcast down the rows.
Var add_row_broadcast(Var a, Var row);
// a (n x m) with row i multiplied by s(i, 0); s is n x 1.
Var scale_rows(Var a, Var s);

}  // namespace ad
}  // namespace prw
