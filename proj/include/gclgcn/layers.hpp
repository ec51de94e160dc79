// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/autodiff.hpp"
#include "gclgcn/centrality.hpp"
#include "gclgcn/graph.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace gclgcn {

using ad::Parameter;
using ad::Tape;
using ad::Var;

/// Uniform in +-sqrt(6 / (rows + cols)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

/// Widths of an encoder ladder, input first: {f, h1, ..., n_z}.
using Ladder = std::vector<std::size_t>;

/// Mirror of an encoder ladder for the decoder: {n_z, ..., h1, f}.
Ladder mirror(const Ladder& encoder);

struct Linear {
  Parameter weight;  // d_in x d_out
  Parameter bias;    // 1 x d_out
};

struct AEParams {
  std::vector<Linear> encoder;
  std::vector<Linear> decoder;
};

struct GcnParams {
  std::vector<Parameter> encoder;
  std::vector<Parameter> decoder;
};

/// Projection weights of one attention layer. Node-feature weights are
/// d_in x (heads * d_out), centrality weights m x (heads * d_out).
struct AttentionWeights {
  Parameter key;
  Parameter query;
  Parameter value;
  Parameter c_key;
  Parameter c_query;
  Parameter c_value;
};

struct GraphormerParams {
  std::vector<AttentionWeights> encoder;
  std::vector<AttentionWeights> decoder;
  int heads = 1;
};

struct ContrastiveParams {
  Parameter w0;  // f x hidden
  Parameter w1;  // hidden x f
  double dropout = 0.2;
  double tau = 0.5;
  double beta_sim = 1.0;
};

AEParams init_ae(const Ladder& ladder, std::mt19937_64& rng);
GcnParams init_gcn(const Ladder& ladder, std::mt19937_64& rng);
GraphormerParams init_graphormer(const Ladder& ladder, std::size_t centrality_width, int heads,
                                 std::mt19937_64& rng);
ContrastiveParams init_contrastive(std::size_t features, std::size_t hidden, std::mt19937_64& rng);

// Stable, named parameter enumeration (optimizer order and checkpoint order).
void collect(AEParams& p, std::vector<Parameter*>& out);
void collect(GcnParams& p, std::vector<Parameter*>& out);
void collect(GraphormerParams& p, std::vector<Parameter*>& out);
void collect(ContrastiveParams& p, std::vector<Parameter*>& out);

// --- autoencoder ---------------------------------------------------------------

struct AeForward {
  std::vector<Var> hidden;  // encoder outputs H^(1..L); back() is the bottleneck
  Var reconstruction;       // n x f
};

/// Leaky ReLU on every layer except the final decoder layer.
AeForward ae_forward(Tape& tape, AEParams& params, const Var& x);

/// (1 / 2N) * sum_i ||x_i - x_hat_i||^2.
Var ae_loss(const Var& x, const Var& x_hat);

// --- GCN -------------------------------------------------------------------------

/// LeakyReLU(A_norm Z W) when `activate`, else A_norm Z W.
Var gcn_layer(const Var& a_norm, const Var& z, const Var& weight, bool activate);

// --- attention -------------------------------------------------------------------

/// Dense attention support (N(i) ∪ {i}) and the signed spatial bias on it.
struct AttentionStructure {
  BoolMatrix mask;
  Matrix bias;
};

/// Throws ContractError if `bias` misses any pair of N(i) ∪ {i}.
AttentionStructure make_attention_structure(const Graph& g, const SpatialBias& bias,
                                            double spatial_sign = 1.0);

struct AttentionVars {
  Var key, query, value, c_key, c_query, c_value;
};

AttentionVars bind(Tape& tape, AttentionWeights& w);

/// One TransformerConv-style layer with centrality-augmented projections.
///
/// Per head: logits_ij = q_i . k_j / sqrt(d) + bias_ij over N(i) ∪ {i},
/// softmax, weighted sum of values. Heads are averaged; LeakyReLU is applied
/// when `activate`. When `attention` is non-null the per-head attention
/// matrices are appended to it.
Var graphormer_layer(const Var& z, const Var& centrality, const AttentionStructure& structure,
                     const AttentionVars& w, int heads, bool activate,
                     std::vector<Var>* attention = nullptr);

// --- contrastive module ------------------------------------------------------------

/// X ⊙ M with M_ij ~ Bernoulli(1 - p).
Matrix augment_features(const Matrix& x, double p, std::uint64_t seed);

/// A_norm ReLU(A_norm X W0) W1.
Var contrastive_encoder(const Var& a_norm, const Var& x, const Var& w0, const Var& w1);

/// S_ab = sgn(b)|b|^beta_sim with b = cos(C1_a, C2_b) / (1 + ||C1_a - C2_b||).
Var combined_similarity(const Var& c1, const Var& c2, double beta_sim);

/// Mean over rows of -log softmax(S_i / tau)_i.
Var contrastive_loss(const Var& s, double tau);

/// sigmoid(Z Z^T).
Var inner_product_decode(const Var& z);

}  // namespace gclgcn
