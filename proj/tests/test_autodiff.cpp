// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "oracles.hpp"

#include "gclgcn/autodiff.hpp"
#include "gclgcn/optim.hpp"

#include <cmath>

using namespace gclgcn;
using namespace gclgcn::ad;
using doctest::Approx;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// Gradient check of a unary op reduced through a random linear functional,
/// so every output entry contributes with a distinct weight.
double check_unary(const std::function<Var(const Var&)>& op, Matrix input, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Parameter p("x", std::move(input));
  Tape probe;
  const Matrix out_shape = op(probe.constant(p.value)).value();
  const Matrix weights = testing::random_matrix(out_shape.rows(), out_shape.cols(), rng);
  std::vector<Parameter*> ps{&p};
  return finite_difference_check(
      [&](Tape& t) { return reduce_sum(hadamard(op(t.parameter(p)), t.constant(weights))); }, ps);
}

double check_binary(const std::function<Var(const Var&, const Var&)>& op, Matrix a, Matrix b,
                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Parameter pa("a", std::move(a));
  Parameter pb("b", std::move(b));
  Tape probe;
  const Matrix out_shape = op(probe.constant(pa.value), probe.constant(pb.value)).value();
  const Matrix weights = testing::random_matrix(out_shape.rows(), out_shape.cols(), rng);
  std::vector<Parameter*> ps{&pa, &pb};
  return finite_difference_check(
      [&](Tape& t) {
        return reduce_sum(hadamard(op(t.parameter(pa), t.parameter(pb)), t.constant(weights)));
      },
      ps);
}

}  // namespace

TEST_CASE("matmul with identity passes the upstream gradient") {
  std::mt19937_64 rng(1);
  Tape t;
  Var i2 = t.constant(Matrix::Identity(2, 2));
  Var m = t.variable(testing::random_matrix(2, 3, rng));
  Var y = matmul(i2, m);
  CHECK(y.value() == m.value());
  t.backward(reduce_sum(y));
  CHECK(m.grad() == Matrix::Ones(2, 3));
}

TEST_CASE("row_softmax of uniform logits") {
  Tape t;
  Var y = row_softmax(t.constant(Matrix::Zero(1, 2)));
  CHECK(y.value()(0, 0) == 0.5);
  CHECK(y.value()(0, 1) == 0.5);
}

TEST_CASE("mse of identical inputs is zero with zero gradient") {
  Tape t;
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  Var a = t.variable(x);
  Var loss = mse(a, t.constant(x));
  CHECK(loss.scalar() == 0.0);
  t.backward(loss);
  CHECK(a.grad().isZero());
}

TEST_CASE("backward basics") {
  SUBCASE("d(x^2) = 2x") {
    Tape t;
    Var x = t.variable(scalar(3));
    t.backward(reduce_sum(square(x)));
    CHECK(x.grad()(0, 0) == 6.0);
  }
  SUBCASE("shared subexpression sums paths") {
    Tape t;
    Var x = t.variable(scalar(1.5));
    t.backward(reduce_sum(add(x, x)));
    CHECK(x.grad()(0, 0) == 2.0);
  }
  SUBCASE("non-scalar loss is a contract error") {
    Tape t;
    Var x = t.variable(Matrix::Ones(2, 1));
    CHECK_THROWS_AS(t.backward(x), ContractError);
  }
  SUBCASE("two backward calls double parameter grads") {
    Parameter w("w", scalar(2.0));
    Tape t;
    Var loss = reduce_sum(square(t.parameter(w)));
    t.backward(loss);
    CHECK(w.grad(0, 0) == 4.0);
    t.backward(loss);
    CHECK(w.grad(0, 0) == 8.0);
  }
}

TEST_CASE("mse(Wx, y) gradient at W = 0 matches -(2/r) y x^T") {
  std::mt19937_64 rng(5);
  const Matrix x = testing::random_matrix(3, 1, rng);
  const Matrix y = testing::random_matrix(4, 1, rng);
  Parameter w("w", Matrix::Zero(4, 3));
  Tape t;
  t.backward(mse(matmul(t.parameter(w), t.constant(x)), t.constant(y)));
  const Matrix expected = -(2.0 / 4.0) * y * x.transpose();
  CHECK((w.grad - expected).cwiseAbs().maxCoeff() < 1e-14);
  std::vector<Parameter*> ps{&w};
  CHECK(finite_difference_check([&](Tape& tt) { return mse(matmul(tt.parameter(w), tt.constant(x)), tt.constant(y)); },
                                ps) <= 1e-6);
}

TEST_CASE("finite_difference_check of x^2 at 3") {
  Parameter x("x", scalar(3));
  std::vector<Parameter*> ps{&x};
  CHECK(finite_difference_check([&](Tape& t) { return reduce_sum(square(t.parameter(x))); }, ps) <= 1e-6);
  CHECK(x.value(0, 0) == 3.0);
}

TEST_CASE("shape mismatch names the operation") {
  Tape t;
  Var a = t.constant(Matrix::Zero(2, 3));
  Var b = t.constant(Matrix::Zero(2, 3));
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("matmul") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, t.constant(Matrix::Zero(3, 2))), DimensionError);
  CHECK_THROWS_AS(add_row(a, t.constant(Matrix::Zero(1, 2))), DimensionError);
}

TEST_CASE("every catalogue operation passes the gradient check over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    auto r = [&](Eigen::Index a, Eigen::Index b) { return testing::random_matrix(a, b, rng); };
    auto pos = [&](Eigen::Index a, Eigen::Index b) { return Matrix(r(a, b).array().abs() + 0.5); };
    CAPTURE(seed);
    // keep leaky/relu inputs away from the kink
    auto off_kink = [&](Eigen::Index a, Eigen::Index b) {
      Matrix m = r(a, b);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += m.data()[i] >= 0 ? 0.1 : -0.1;
      return m;
    };
    BoolMatrix mask = BoolMatrix::Constant(4, 4, false);
    for (int i = 0; i < 4; ++i) {
      mask(i, i) = true;
      mask(i, (i + 1) % 4) = true;
    }
    const Matrix c = r(3, 4);
    std::vector<Eigen::Index> rows{2, 0, 2, 1};

    CHECK(check_binary([](auto& a, auto& b) { return add(a, b); }, r(3, 4), r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return sub(a, b); }, r(3, 4), r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return add_row(a, b); }, r(3, 4), r(1, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return add_scalar(a, 0.7); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([&](auto& a) { return add_constant(a, c); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return scale(a, -1.3); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return hadamard(a, b); }, r(3, 4), r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return divide(a, b); }, r(3, 4), pos(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return divide_rows(a, b); }, r(3, 4), pos(3, 1), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return transpose(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return matmul(a, b); }, r(3, 4), r(4, 2), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return row_softmax(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([&](auto& a) { return masked_row_softmax(a, mask); }, r(4, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return row_log_softmax(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return sigmoid(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return relu(a); }, off_kink(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return leaky_relu(a, 0.01); }, off_kink(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return exp(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return log(a); }, pos(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return square(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return sqrt(a); }, pos(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return pow(a, -1.5); }, pos(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return signed_pow(a, 1.7); }, off_kink(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return clamp_min(a, 0.05); }, off_kink(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return reduce_sum(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return reduce_mean(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return row_sum(a); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return mse(a, b); }, r(3, 4), r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return pairwise_sq_dist(a, b); }, r(3, 4), r(5, 4), seed) <= 1e-4);
    CHECK(check_unary([&](auto& a) { return gather_rows(a, rows); }, r(3, 4), seed) <= 1e-4);
    CHECK(check_binary([](auto& a, auto& b) { return concat_cols({a, b, a}); }, r(3, 2), r(3, 4), seed) <= 1e-4);
    CHECK(check_unary([](auto& a) { return slice_cols(a, 1, 2); }, r(3, 4), seed) <= 1e-4);
  }
}

TEST_CASE("softmax rows sum to one") {
  std::mt19937_64 rng(3);
  Tape t;
  Var s = row_softmax(t.constant(testing::random_matrix(6, 9, rng, 10.0)));
  for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(s.value().row(i).sum() - 1.0) <= 1e-12);
  BoolMatrix none = BoolMatrix::Constant(2, 2, false);
  CHECK_THROWS_AS(masked_row_softmax(t.constant(Matrix::Zero(2, 2)), none), ContractError);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves params unchanged") {
    Parameter p("p", Matrix::Constant(2, 2, 1.5));
    std::vector<Parameter*> ps{&p};
    auto state = make_adam_state(ps, {});
    adam_step(ps, state);
    CHECK(p.value == Matrix::Constant(2, 2, 1.5));
    CHECK(state.step == 1);
  }
  SUBCASE("first step moves by about lr") {
    Parameter p("p", scalar(0.0));
    p.grad(0, 0) = 1.0;
    std::vector<Parameter*> ps{&p};
    auto state = make_adam_state(ps, {.lr = 0.1});
    adam_step(ps, state);
    CHECK(p.value(0, 0) == Approx(-0.1).epsilon(1e-7));
  }
  SUBCASE("deterministic trajectories") {
    auto run = [] {
      std::mt19937_64 rng(17);
      Parameter w("w", testing::random_matrix(3, 3, rng));
      const Matrix target = testing::random_matrix(3, 3, rng);
      std::vector<Parameter*> ps{&w};
      auto state = make_adam_state(ps, {.lr = 0.05});
      for (int i = 0; i < 25; ++i) {
        zero_grads(ps);
        Tape t;
        t.backward(mse(t.parameter(w), t.constant(target)));
        adam_step(ps, state);
      }
      return w.value;
    };
    CHECK(run() == run());
  }
}
