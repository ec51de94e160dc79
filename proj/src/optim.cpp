// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/optim.hpp"

#include <algorithm>
#include <cmath>

namespace gclgcn::ad {

AdamState make_adam_state(std::span<Parameter* const> params, AdamOptions options) {
  AdamState state;
  state.options = options;
  for (const Parameter* p : params) {
    state.first.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    state.second.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (params.size() != state.first.size()) {
    throw ContractError("adam_step: parameter list does not match optimizer state");
  }
  const auto& o = state.options;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        state.first[i].rows() != p.value.rows() || state.first[i].cols() != p.value.cols()) {
      throw DimensionError("adam_step: shape mismatch for parameter '" + p.name + "'");
    }
    auto m = state.first[i].array();
    auto v = state.second[i].array();
    const auto g = p.grad.array();
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.square();
    p.value.array() -= o.lr * (m / c1) / ((v / c2).sqrt() + o.eps);
  }
}

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

double finite_difference_check(const LossFn& f, std::span<Parameter* const> params,
                               GradCheckOptions options) {
  zero_grads(params);
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  std::vector<Matrix> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad);
  zero_grads(params);

  auto evaluate = [&] {
    Tape tape;
    return f(tape).scalar();
  };

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    const auto total = static_cast<std::size_t>(p.value.size());
    std::size_t stride = 1;
    if (options.max_coords_per_param > 0 && total > options.max_coords_per_param) {
      stride = (total + options.max_coords_per_param - 1) / options.max_coords_per_param;
    }
    for (std::size_t c = 0; c < total; c += stride) {
      double& slot = p.value.data()[c];
      const double saved = slot;
      slot = saved + options.h;
      const double up = evaluate();
      slot = saved - options.h;
      const double down = evaluate();
      slot = saved;
      const double numeric = (up - down) / (2.0 * options.h);
      const double exact = analytic[pi].data()[c];
      worst = std::max(worst, std::abs(numeric - exact) / std::max(1.0, std::abs(exact)));
    }
  }
  return worst;
}

}  // namespace gclgcn::ad
