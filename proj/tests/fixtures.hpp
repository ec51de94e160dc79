// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small graphs and configs shared by the training-level tests.

#include "gclgcn/training.hpp"

namespace gclgcn::testing {

inline Graph small_sbm(std::uint64_t seed, std::size_t per_block = 10, std::size_t f = 6) {
  SbmSpec spec;
  spec.block_sizes = {per_block, per_block, per_block};
  spec.p_in = 0.4;
  spec.p_out = 0.03;
  spec.noise_std = 1.0;
  spec.block_means = separated_block_means(3, f, 3.0);
  return generate_sbm(spec, seed);
}

/// Cheap enough to train in well under a second.
inline ExperimentConfig tiny_config(std::uint64_t seed = 0) {
  ExperimentConfig cfg;
  cfg.epochs = 5;
  cfg.n_z = 3;
  cfg.hidden = {8, 6, 10};
  cfg.ae_epochs = 5;
  cfg.contrastive.epochs = 5;
  cfg.contrastive.hidden = 8;
  cfg.seed = seed;
  cfg.lr = 1e-3;
  return cfg;
}

}  // namespace gclgcn::testing
