// SPDX-License-Identifier: Apache-2.0
#pragma once

// Dense reverse-mode differentiation over double matrices.
//
// A Tape records every operation eagerly. Nodes are appended in creation
// order, so walking the tape backwards from the loss is a valid reverse
// topological order. Tapes are cheap and rebuilt for every training step.

#include "gclgcn/types.hpp"

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gclgcn::ad {

/// Trainable matrix with a persistent gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string name, Matrix value);
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

/// Handle to a node on a Tape. Valid as long as the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  /// Gradient written by the last backward pass; zeros if none reached it.
  Matrix grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;
  bool requires_grad() const;

  /// False for a default-constructed handle.
  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Backward rule: receives the node's own upstream gradient.
  using BackwardFn = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Free leaf whose gradient accumulates on the node itself.
  Var variable(Matrix value);
  /// Leaf bound to a parameter; backward adds into `param.grad`.
  Var parameter(Parameter& param);

  /// Populates gradients of every requires-grad ancestor of `loss`.
  /// Parameter and leaf gradients accumulate across calls.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

  // Used by operation implementations.
  Var record(const char* op, Matrix value, std::initializer_list<Var> parents, BackwardFn fn);
  Var record(const char* op, Matrix value, const std::vector<Var>& parents, BackwardFn fn);
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  template <class Expr>
  void accumulate(std::size_t id, const Expr& g) {
    Node& node = nodes_[id];
    if (!node.requires_grad) return;
    if (!node.has_grad) {
      node.grad = g;
      node.has_grad = true;
    } else {
      node.grad += g;
    }
  }

 private:
  friend class Var;

  struct Node {
    const char* op = "";
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    bool is_leaf = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  Var push(Node node);

  // deque keeps references to earlier node values stable while recording
  std::deque<Node> nodes_;
};

// --- operation catalogue ---------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// a (r x c) + b (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& b);
Var add_scalar(const Var& a, double s);
/// a + c for a constant matrix c that is not recorded on the tape.
Var add_constant(const Var& a, const Matrix& c);
Var scale(const Var& a, double s);
Var hadamard(const Var& a, const Var& b);
/// Elementwise a / b.
Var divide(const Var& a, const Var& b);
/// a (r x c) with row i divided by b(i) for b (r x 1).
Var divide_rows(const Var& a, const Var& b);
Var transpose(const Var& a);
Var matmul(const Var& a, const Var& b);

Var row_softmax(const Var& a);
/// Softmax over the entries where mask is true; other entries are 0.
/// Every row needs at least one true entry.
Var masked_row_softmax(const Var& a, const BoolMatrix& mask);
Var row_log_softmax(const Var& a);

Var sigmoid(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope = 0.01);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);
/// sqrt with the derivative taken as 0 at (and below) 1e-300.
Var sqrt(const Var& a);
/// a^p for a > 0.
Var pow(const Var& a, double p);
/// sgn(a) |a|^p; the derivative is taken as 0 where |a| < 1e-12.
Var signed_pow(const Var& a, double p);
/// max(a, floor) with gradient passing only where a > floor.
Var clamp_min(const Var& a, double floor);

Var reduce_sum(const Var& a);
Var reduce_mean(const Var& a);
/// r x 1 column of row sums.
Var row_sum(const Var& a);
Var mse(const Var& a, const Var& b);

/// D_ij = ||a_i - b_j||^2, clamped at zero.
Var pairwise_sq_dist(const Var& a, const Var& b);

Var gather_rows(const Var& a, std::span<const Eigen::Index> rows);
Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);

}  // namespace gclgcn::ad
