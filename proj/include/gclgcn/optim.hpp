// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/autodiff.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gclgcn::ad {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for a fixed, ordered parameter list.
struct AdamState {
  AdamOptions options;
  std::uint64_t step = 0;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
};

AdamState make_adam_state(std::span<Parameter* const> params, AdamOptions options);

/// One bias-corrected Adam update using each parameter's accumulated grad.
void adam_step(std::span<Parameter* const> params, AdamState& state);

void zero_grads(std::span<Parameter* const> params);

/// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&)>;

struct GradCheckOptions {
  double h = 1e-5;
  /// Per-parameter cap on probed coordinates (evenly strided); 0 = all.
  std::size_t max_coords_per_param = 0;
};

/// Central-difference check of the tape gradient.
///
/// Returns max over probed coordinates of |numeric - analytic| / max(1, |analytic|).
/// Parameter values are restored and grads left zeroed on return.
double finite_difference_check(const LossFn& f, std::span<Parameter* const> params,
                               GradCheckOptions options = {});

}  // namespace gclgcn::ad
