// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/autodiff.hpp"

#include <cmath>
#include <limits>

namespace gclgcn::ad {

namespace {

std::string shape(const Var& v) {
  return std::to_string(v.rows()) + "x" + std::to_string(v.cols());
}

void same_tape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
}

void same_shape(const Var& a, const Var& b, const char* op) {
  same_tape(a, b, op);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

Matrix from_scalar(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

Parameter::Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)) {
  zero_grad();
}

const Matrix& Var::value() const { return tape_->nodes_[id_].value; }

Matrix Var::grad() const {
  const auto& node = tape_->nodes_[id_];
  if (!node.has_grad) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ContractError("scalar() on non-1x1 node");
  return v(0, 0);
}

bool Var::requires_grad() const { return tape_->nodes_[id_].requires_grad; }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  n.is_leaf = true;
  return push(std::move(n));
}

Var Tape::variable(Matrix value) {
  Node n;
  n.op = "variable";
  n.value = std::move(value);
  n.requires_grad = true;
  n.is_leaf = true;
  return push(std::move(n));
}

Var Tape::parameter(Parameter& param) {
  Node n;
  n.op = "parameter";
  n.value = param.value;
  n.requires_grad = true;
  n.is_leaf = true;
  n.param = &param;
  return push(std::move(n));
}

Var Tape::record(const char* op, Matrix value, const std::vector<Var>& parents, BackwardFn fn) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  for (const auto& p : parents) {
    if (&p.tape() != this) throw ContractError(std::string(op) + ": parent on a different tape");
    n.requires_grad = n.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

Var Tape::record(const char* op, Matrix value, std::initializer_list<Var> parents, BackwardFn fn) {
  return record(op, std::move(value), std::vector<Var>(parents), std::move(fn));
}

void Tape::backward(const Var& loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss on a different tape");
  Node& root = nodes_[loss.id()];
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + shape(loss));
  }
  for (auto& n : nodes_) {
    if (!n.is_leaf) {
      n.has_grad = false;
      n.grad.resize(0, 0);
    }
  }
  if (!root.requires_grad) return;

  // Parameter leaves hand their gradient to the Parameter and reset; free
  // leaves keep accumulating on the node.
  for (auto& n : nodes_) {
    if (n.param) {
      n.has_grad = false;
      n.grad.resize(0, 0);
    }
  }
  accumulate(loss.id(), Matrix::Ones(1, 1));
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.has_grad) continue;
    // rules only touch parents (lower ids), so n.grad is stable here
    if (n.backward) n.backward(*this, n.grad);
    if (n.param) n.param->grad += n.grad;
  }
}

// --- elementwise and linear algebra -----------------------------------------

Var add(const Var& a, const Var& b) {
  same_shape(a, b, "add");
  return a.tape().record("add", a.value() + b.value(), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, g);
                         });
}

Var sub(const Var& a, const Var& b) {
  same_shape(a, b, "sub");
  return a.tape().record("sub", a.value() - b.value(), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           t.accumulate(ib, -g);
                         });
}

Var add_row(const Var& a, const Var& b) {
  same_tape(a, b, "add_row");
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw DimensionError("add_row: expected 1x" + std::to_string(a.cols()) + " row, got " + shape(b));
  }
  Matrix out = a.value().rowwise() + b.value().row(0);
  return a.tape().record("add_row", std::move(out), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g);
                           if (t.requires_grad(ib)) t.accumulate(ib, Matrix(g.colwise().sum()));
                         });
}

Var add_scalar(const Var& a, double s) {
  Matrix out = a.value().array() + s;
  return a.tape().record("add_scalar", std::move(out), {a},
                         [ia = a.id()](Tape& t, const Matrix& g) { t.accumulate(ia, g); });
}

Var add_constant(const Var& a, const Matrix& c) {
  if (c.rows() != a.rows() || c.cols() != a.cols()) {
    throw DimensionError("add_constant: shape mismatch " + shape(a) + " vs " + std::to_string(c.rows()) +
                         "x" + std::to_string(c.cols()));
  }
  return a.tape().record("add_constant", a.value() + c, {a},
                         [ia = a.id()](Tape& t, const Matrix& g) { t.accumulate(ia, g); });
}

Var scale(const Var& a, double s) {
  return a.tape().record("scale", a.value() * s, {a},
                         [ia = a.id(), s](Tape& t, const Matrix& g) { t.accumulate(ia, g * s); });
}

Var hadamard(const Var& a, const Var& b) {
  same_shape(a, b, "hadamard");
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape().record("hadamard", std::move(out), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                           if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                         });
}

Var divide(const Var& a, const Var& b) {
  same_shape(a, b, "divide");
  Matrix out = a.value().cwiseQuotient(b.value());
  return a.tape().record(
      "divide", std::move(out), {a, b}, [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
        const Matrix& bv = t.value(ib);
        if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseQuotient(bv));
        if (t.requires_grad(ib)) {
          t.accumulate(ib, Matrix(-(g.array() * t.value(ia).array() / bv.array().square())));
        }
      });
}

Var divide_rows(const Var& a, const Var& b) {
  same_tape(a, b, "divide_rows");
  if (b.cols() != 1 || b.rows() != a.rows()) {
    throw DimensionError("divide_rows: expected " + std::to_string(a.rows()) + "x1 divisor, got " +
                         shape(b));
  }
  Matrix out = a.value().array().colwise() / b.value().col(0).array();
  return a.tape().record(
      "divide_rows", std::move(out), {a, b}, [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
        const auto d = t.value(ib).col(0).array();
        if (t.requires_grad(ia)) t.accumulate(ia, Matrix(g.array().colwise() / d));
        if (t.requires_grad(ib)) {
          Vector s = (g.array() * t.value(ia).array()).rowwise().sum();
          t.accumulate(ib, Matrix(-(s.array() / d.square()).matrix()));
        }
      });
}

Var transpose(const Var& a) {
  return a.tape().record("transpose", a.value().transpose(), {a},
                         [ia = a.id()](Tape& t, const Matrix& g) { t.accumulate(ia, g.transpose()); });
}

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape(a) + " * " + shape(b));
  }
  Matrix out = a.value() * b.value();
  return a.tape().record("matmul", std::move(out), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           if (t.requires_grad(ia)) t.accumulate(ia, Matrix(g * t.value(ib).transpose()));
                           if (t.requires_grad(ib)) t.accumulate(ib, Matrix(t.value(ia).transpose() * g));
                         });
}

// --- softmax family -----------------------------------------------------------

namespace {

Matrix softmax_backward(const Matrix& s, const Matrix& g) {
  Vector dot = (g.cwiseProduct(s)).rowwise().sum();
  return s.array() * (g.array().colwise() - dot.array());
}

}  // namespace

Var row_softmax(const Var& a) {
  const Matrix& x = a.value();
  Matrix s = (x.colwise() - x.rowwise().maxCoeff()).array().exp();
  s.array().colwise() /= s.rowwise().sum().array();
  Matrix value = s;
  return a.tape().record("row_softmax", std::move(value), {a},
                         [ia = a.id(), s = std::move(s)](Tape& t, const Matrix& g) {
                           t.accumulate(ia, softmax_backward(s, g));
                         });
}

Var masked_row_softmax(const Var& a, const BoolMatrix& mask) {
  const Matrix& x = a.value();
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw DimensionError("masked_row_softmax: mask shape mismatch");
  }
  Matrix s = Matrix::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!mask(i, j)) continue;
      any = true;
      // NaN must survive so the caller sees a non-finite loss
      mx = std::isnan(x(i, j)) ? x(i, j) : std::max(mx, x(i, j));
      if (std::isnan(mx)) break;
    }
    if (!any) {
      throw ContractError("masked_row_softmax: row " + std::to_string(i) + " has empty support");
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (mask(i, j)) {
        s(i, j) = std::exp(x(i, j) - mx);
        total += s(i, j);
      }
    }
    s.row(i) /= total;
  }
  Matrix value = s;
  return a.tape().record("masked_row_softmax", std::move(value), {a},
                         [ia = a.id(), s = std::move(s)](Tape& t, const Matrix& g) {
                           t.accumulate(ia, softmax_backward(s, g));
                         });
}

Var row_log_softmax(const Var& a) {
  const Matrix& x = a.value();
  Vector mx = x.rowwise().maxCoeff();
  Matrix shifted = x.colwise() - mx;
  Vector lse = shifted.array().exp().rowwise().sum().log();
  Matrix out = shifted.colwise() - lse;
  Matrix soft = out.array().exp();
  return a.tape().record("row_log_softmax", std::move(out), {a},
                         [ia = a.id(), soft = std::move(soft)](Tape& t, const Matrix& g) {
                           Vector gs = g.rowwise().sum();
                           t.accumulate(ia, Matrix(g - (soft.array().colwise() * gs.array()).matrix()));
                         });
}

// --- pointwise nonlinearities --------------------------------------------------

Var sigmoid(const Var& a) {
  Matrix s = (1.0 + (-a.value().array()).exp()).inverse();
  Matrix value = s;
  return a.tape().record("sigmoid", std::move(value), {a},
                         [ia = a.id(), s = std::move(s)](Tape& t, const Matrix& g) {
                           t.accumulate(ia, Matrix(g.array() * s.array() * (1.0 - s.array())));
                         });
}

Var relu(const Var& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape().record("relu", std::move(out), {a}, [ia = a.id()](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix((t.value(ia).array() > 0.0).select(g.array(), 0.0)));
  });
}

Var leaky_relu(const Var& a, double slope) {
  Matrix out = (a.value().array() > 0.0).select(a.value().array(), slope * a.value().array());
  return a.tape().record("leaky_relu", std::move(out), {a},
                         [ia = a.id(), slope](Tape& t, const Matrix& g) {
                           t.accumulate(ia, Matrix((t.value(ia).array() > 0.0).select(g.array(), slope * g.array())));
                         });
}

Var exp(const Var& a) {
  Matrix e = a.value().array().exp();
  Matrix value = e;
  return a.tape().record("exp", std::move(value), {a},
                         [ia = a.id(), e = std::move(e)](Tape& t, const Matrix& g) {
                           t.accumulate(ia, g.cwiseProduct(e));
                         });
}

Var log(const Var& a) {
  Matrix out = a.value().array().log();
  return a.tape().record("log", std::move(out), {a}, [ia = a.id()](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.cwiseQuotient(t.value(ia)));
  });
}

Var square(const Var& a) {
  Matrix out = a.value().array().square();
  return a.tape().record("square", std::move(out), {a}, [ia = a.id()](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix(2.0 * g.array() * t.value(ia).array()));
  });
}

Var sqrt(const Var& a) {
  Matrix r = a.value().cwiseMax(0.0).array().sqrt();
  Matrix value = r;
  return a.tape().record("sqrt", std::move(value), {a},
                         [ia = a.id(), r = std::move(r)](Tape& t, const Matrix& g) {
                           t.accumulate(ia, Matrix((r.array() > 1e-150).select(0.5 * g.array() / r.array(), 0.0)));
                         });
}

Var pow(const Var& a, double p) {
  Matrix out = a.value().array().pow(p);
  return a.tape().record("pow", std::move(out), {a}, [ia = a.id(), p](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix(g.array() * p * t.value(ia).array().pow(p - 1.0)));
  });
}

Var signed_pow(const Var& a, double p) {
  const auto x = a.value().array();
  Matrix out = x.sign() * x.abs().pow(p);
  return a.tape().record("signed_pow", std::move(out), {a}, [ia = a.id(), p](Tape& t, const Matrix& g) {
    const auto ax = t.value(ia).array().abs();
    t.accumulate(ia, Matrix((ax >= 1e-12).select(g.array() * p * ax.pow(p - 1.0), 0.0)));
  });
}

Var clamp_min(const Var& a, double floor) {
  Matrix out = a.value().cwiseMax(floor);
  return a.tape().record("clamp_min", std::move(out), {a},
                         [ia = a.id(), floor](Tape& t, const Matrix& g) {
                           t.accumulate(ia, Matrix((t.value(ia).array() > floor).select(g.array(), 0.0)));
                         });
}

// --- reductions ------------------------------------------------------------------

Var reduce_sum(const Var& a) {
  return a.tape().record("reduce_sum", from_scalar(a.value().sum()), {a},
                         [ia = a.id()](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           t.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
                         });
}

Var reduce_mean(const Var& a) {
  const double count = static_cast<double>(a.value().size());
  if (count == 0) throw DimensionError("reduce_mean: empty operand");
  return a.tape().record("reduce_mean", from_scalar(a.value().sum() / count), {a},
                         [ia = a.id(), count](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           t.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0) / count));
                         });
}

Var row_sum(const Var& a) {
  Matrix out = a.value().rowwise().sum();
  return a.tape().record("row_sum", std::move(out), {a}, [ia = a.id()](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    t.accumulate(ia, Matrix(g.col(0).replicate(1, x.cols())));
  });
}

Var mse(const Var& a, const Var& b) {
  same_shape(a, b, "mse");
  const double count = static_cast<double>(a.value().size());
  if (count == 0) throw DimensionError("mse: empty operands");
  Matrix diff = a.value() - b.value();
  const double value = diff.squaredNorm() / count;
  return a.tape().record("mse", from_scalar(value), {a, b},
                         [ia = a.id(), ib = b.id(), count, diff = std::move(diff)](Tape& t, const Matrix& g) {
                           const double c = 2.0 * g(0, 0) / count;
                           if (t.requires_grad(ia)) t.accumulate(ia, diff * c);
                           if (t.requires_grad(ib)) t.accumulate(ib, diff * -c);
                         });
}

Var pairwise_sq_dist(const Var& a, const Var& b) {
  same_tape(a, b, "pairwise_sq_dist");
  if (a.cols() != b.cols()) {
    throw DimensionError("pairwise_sq_dist: width mismatch " + shape(a) + " vs " + shape(b));
  }
  const Matrix& x = a.value();
  const Matrix& y = b.value();
  Vector xn = x.rowwise().squaredNorm();
  Vector yn = y.rowwise().squaredNorm();
  Matrix d = -2.0 * x * y.transpose();
  d.colwise() += xn;
  d.rowwise() += yn.transpose();
  d = d.cwiseMax(0.0);
  return a.tape().record("pairwise_sq_dist", std::move(d), {a, b},
                         [ia = a.id(), ib = b.id()](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           const Matrix& y = t.value(ib);
                           if (t.requires_grad(ia)) {
                             Vector rs = g.rowwise().sum();
                             t.accumulate(ia, Matrix(2.0 * (x.array().colwise() * rs.array()).matrix() - 2.0 * g * y));
                           }
                           if (t.requires_grad(ib)) {
                             Vector cs = g.colwise().sum().transpose();
                             t.accumulate(ib, Matrix(2.0 * (y.array().colwise() * cs.array()).matrix() -
                                                     2.0 * g.transpose() * x));
                           }
                         });
}

// --- structural -------------------------------------------------------------------

Var gather_rows(const Var& a, std::span<const Eigen::Index> rows) {
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= x.rows()) throw DimensionError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  }
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  return a.tape().record("gather_rows", std::move(out), {a},
                         [ia = a.id(), idx = std::move(idx)](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           Matrix acc = Matrix::Zero(x.rows(), x.cols());
                           for (std::size_t r = 0; r < idx.size(); ++r) {
                             acc.row(idx[r]) += g.row(static_cast<Eigen::Index>(r));
                           }
                           t.accumulate(ia, acc);
                         });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows) throw DimensionError("concat_cols: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<std::size_t, Eigen::Index>> layout;
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    layout.emplace_back(p.id(), offset);
    offset += p.cols();
  }
  return parts.front().tape().record("concat_cols", std::move(out), parts,
                                     [layout = std::move(layout)](Tape& t, const Matrix& g) {
                                       for (const auto& [id, off] : layout) {
                                         if (t.requires_grad(id)) {
                                           t.accumulate(id, Matrix(g.middleCols(off, t.value(id).cols())));
                                         }
                                       }
                                     });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError("slice_cols: range outside " + shape(a));
  }
  Matrix out = a.value().middleCols(start, count);
  return a.tape().record("slice_cols", std::move(out), {a},
                         [ia = a.id(), start, count](Tape& t, const Matrix& g) {
                           const Matrix& x = t.value(ia);
                           Matrix acc = Matrix::Zero(x.rows(), x.cols());
                           acc.middleCols(start, count) = g;
                           t.accumulate(ia, acc);
                         });
}

}  // namespace gclgcn::ad
