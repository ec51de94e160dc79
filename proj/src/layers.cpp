// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/layers.hpp"

#include <cmath>

namespace gclgcn {

namespace {

constexpr double kLeakySlope = 0.01;

std::string layer_name(const std::string& prefix, const char* part, std::size_t index,
                       const char* role) {
  return prefix + "." + part + std::to_string(index) + "." + role;
}

Matrix zeros_row(std::size_t width) { return Matrix::Zero(1, static_cast<Eigen::Index>(width)); }

}  // namespace

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Ladder mirror(const Ladder& encoder) { return Ladder(encoder.rbegin(), encoder.rend()); }

AEParams init_ae(const Ladder& ladder, std::mt19937_64& rng) {
  if (ladder.size() < 2) throw ConfigError("init_ae: ladder needs at least two widths");
  AEParams p;
  const Ladder dec = mirror(ladder);
  for (std::size_t l = 0; l + 1 < ladder.size(); ++l) {
    p.encoder.push_back(
        {Parameter(layer_name("ae", "enc", l, "weight"),
                   glorot_uniform(static_cast<Eigen::Index>(ladder[l]), static_cast<Eigen::Index>(ladder[l + 1]), rng)),
         Parameter(layer_name("ae", "enc", l, "bias"), zeros_row(ladder[l + 1]))});
  }
  for (std::size_t l = 0; l + 1 < dec.size(); ++l) {
    p.decoder.push_back(
        {Parameter(layer_name("ae", "dec", l, "weight"),
                   glorot_uniform(static_cast<Eigen::Index>(dec[l]), static_cast<Eigen::Index>(dec[l + 1]), rng)),
         Parameter(layer_name("ae", "dec", l, "bias"), zeros_row(dec[l + 1]))});
  }
  return p;
}

GcnParams init_gcn(const Ladder& ladder, std::mt19937_64& rng) {
  if (ladder.size() < 2) throw ConfigError("init_gcn: ladder needs at least two widths");
  GcnParams p;
  const Ladder dec = mirror(ladder);
  for (std::size_t l = 0; l + 1 < ladder.size(); ++l) {
    p.encoder.emplace_back(layer_name("gcn", "enc", l, "weight"),
                           glorot_uniform(static_cast<Eigen::Index>(ladder[l]), static_cast<Eigen::Index>(ladder[l + 1]), rng));
  }
  for (std::size_t l = 0; l + 1 < dec.size(); ++l) {
    p.decoder.emplace_back(layer_name("gcn", "dec", l, "weight"),
                           glorot_uniform(static_cast<Eigen::Index>(dec[l]), static_cast<Eigen::Index>(dec[l + 1]), rng));
  }
  return p;
}

namespace {

AttentionWeights init_attention(const std::string& prefix, std::size_t d_in, std::size_t d_out,
                                std::size_t m, int heads, std::mt19937_64& rng) {
  const auto in = static_cast<Eigen::Index>(d_in);
  const auto width = static_cast<Eigen::Index>(d_out) * heads;
  const auto cw = static_cast<Eigen::Index>(m);
  AttentionWeights w;
  w.key = Parameter(prefix + ".key", glorot_uniform(in, width, rng));
  w.query = Parameter(prefix + ".query", glorot_uniform(in, width, rng));
  w.value = Parameter(prefix + ".value", glorot_uniform(in, width, rng));
  w.c_key = Parameter(prefix + ".c_key", glorot_uniform(cw, width, rng));
  w.c_query = Parameter(prefix + ".c_query", glorot_uniform(cw, width, rng));
  w.c_value = Parameter(prefix + ".c_value", glorot_uniform(cw, width, rng));
  return w;
}

}  // namespace

GraphormerParams init_graphormer(const Ladder& ladder, std::size_t centrality_width, int heads,
                                 std::mt19937_64& rng) {
  if (ladder.size() < 2) throw ConfigError("init_graphormer: ladder needs at least two widths");
  if (heads < 1) throw ConfigError("init_graphormer: heads must be >= 1");
  if (centrality_width < 1) throw ConfigError("init_graphormer: centrality width must be >= 1");
  GraphormerParams p;
  p.heads = heads;
  const Ladder dec = mirror(ladder);
  for (std::size_t l = 0; l + 1 < ladder.size(); ++l) {
    p.encoder.push_back(init_attention("graphormer.enc" + std::to_string(l), ladder[l], ladder[l + 1],
                                       centrality_width, heads, rng));
  }
  for (std::size_t l = 0; l + 1 < dec.size(); ++l) {
    p.decoder.push_back(init_attention("graphormer.dec" + std::to_string(l), dec[l], dec[l + 1],
                                       centrality_width, heads, rng));
  }
  return p;
}

ContrastiveParams init_contrastive(std::size_t features, std::size_t hidden, std::mt19937_64& rng) {
  ContrastiveParams p;
  const auto f = static_cast<Eigen::Index>(features);
  const auto h = static_cast<Eigen::Index>(hidden);
  p.w0 = Parameter("contrastive.w0", glorot_uniform(f, h, rng));
  p.w1 = Parameter("contrastive.w1", glorot_uniform(h, f, rng));
  return p;
}

void collect(AEParams& p, std::vector<Parameter*>& out) {
  for (auto& l : p.encoder) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : p.decoder) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
}

void collect(GcnParams& p, std::vector<Parameter*>& out) {
  for (auto& w : p.encoder) out.push_back(&w);
  for (auto& w : p.decoder) out.push_back(&w);
}

void collect(GraphormerParams& p, std::vector<Parameter*>& out) {
  for (auto* side : {&p.encoder, &p.decoder}) {
    for (auto& w : *side) {
      for (Parameter* q : {&w.key, &w.query, &w.value, &w.c_key, &w.c_query, &w.c_value}) out.push_back(q);
    }
  }
}

void collect(ContrastiveParams& p, std::vector<Parameter*>& out) {
  out.push_back(&p.w0);
  out.push_back(&p.w1);
}

AeForward ae_forward(Tape& tape, AEParams& params, const Var& x) {
  AeForward out;
  Var h = x;
  for (auto& layer : params.encoder) {
    h = ad::leaky_relu(ad::add_row(ad::matmul(h, tape.parameter(layer.weight)), tape.parameter(layer.bias)),
                       kLeakySlope);
    out.hidden.push_back(h);
  }
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    auto& layer = params.decoder[l];
    h = ad::add_row(ad::matmul(h, tape.parameter(layer.weight)), tape.parameter(layer.bias));
    if (l + 1 < params.decoder.size()) h = ad::leaky_relu(h, kLeakySlope);
  }
  out.reconstruction = h;
  return out;
}

Var ae_loss(const Var& x, const Var& x_hat) {
  const double n = static_cast<double>(x.rows());
  return ad::scale(ad::reduce_sum(ad::square(ad::sub(x, x_hat))), 1.0 / (2.0 * n));
}

Var gcn_layer(const Var& a_norm, const Var& z, const Var& weight, bool activate) {
  // Associate to keep the n x n product on the narrower side.
  Var out = weight.cols() <= z.cols() ? ad::matmul(a_norm, ad::matmul(z, weight))
                                      : ad::matmul(ad::matmul(a_norm, z), weight);
  return activate ? ad::leaky_relu(out, kLeakySlope) : out;
}

AttentionStructure make_attention_structure(const Graph& g, const SpatialBias& bias, double spatial_sign) {
  const auto n = static_cast<Eigen::Index>(g.n());
  AttentionStructure s;
  s.mask = BoolMatrix::Constant(n, n, false);
  s.bias = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < g.n(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    s.mask(ii, ii) = true;
    s.bias(ii, ii) = spatial_sign * bias.at(i, i);
    for (std::size_t j : g.neighbors(i)) {
      const auto jj = static_cast<Eigen::Index>(j);
      s.mask(ii, jj) = true;
      s.bias(ii, jj) = spatial_sign * bias.at(i, j);
    }
  }
  return s;
}

AttentionVars bind(Tape& tape, AttentionWeights& w) {
  return {tape.parameter(w.key),   tape.parameter(w.query),   tape.parameter(w.value),
          tape.parameter(w.c_key), tape.parameter(w.c_query), tape.parameter(w.c_value)};
}

Var graphormer_layer(const Var& z, const Var& centrality, const AttentionStructure& structure,
                     const AttentionVars& w, int heads, bool activate, std::vector<Var>* attention) {
  if (heads < 1) throw ContractError("graphormer_layer: heads must be >= 1");
  if (centrality.rows() != z.rows()) throw DimensionError("graphormer_layer: centrality row count != n");
  if (structure.mask.rows() != z.rows()) throw DimensionError("graphormer_layer: structure size != n");

  const Var key = ad::add(ad::matmul(z, w.key), ad::matmul(centrality, w.c_key));
  const Var query = ad::add(ad::matmul(z, w.query), ad::matmul(centrality, w.c_query));
  const Var value = ad::add(ad::matmul(z, w.value), ad::matmul(centrality, w.c_value));
  if (key.cols() % heads != 0) throw DimensionError("graphormer_layer: width not divisible by heads");
  const Eigen::Index d = key.cols() / heads;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Var combined;
  for (int h = 0; h < heads; ++h) {
    Var qh = query, kh = key, vh = value;
    if (heads > 1) {
      qh = ad::slice_cols(query, h * d, d);
      kh = ad::slice_cols(key, h * d, d);
      vh = ad::slice_cols(value, h * d, d);
    }
    Var logits = ad::add_constant(ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt_d), structure.bias);
    Var att = ad::masked_row_softmax(logits, structure.mask);
    if (attention) attention->push_back(att);
    Var th = ad::matmul(att, vh);
    combined = h == 0 ? th : ad::add(combined, th);
  }
  if (heads > 1) combined = ad::scale(combined, 1.0 / heads);
  return activate ? ad::leaky_relu(combined, kLeakySlope) : combined;
}

Matrix augment_features(const Matrix& x, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw ConfigError("augment_features: p must lie in [0,1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(1.0 - p);
  Matrix out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (!keep(rng)) out.data()[i] = 0.0;
  }
  return out;
}

Var contrastive_encoder(const Var& a_norm, const Var& x, const Var& w0, const Var& w1) {
  Var hidden = ad::relu(ad::matmul(a_norm, ad::matmul(x, w0)));
  return ad::matmul(a_norm, ad::matmul(hidden, w1));
}

Var combined_similarity(const Var& c1, const Var& c2, double beta_sim) {
  constexpr double kEps = 1e-12;
  Var n1 = ad::sqrt(ad::row_sum(ad::square(c1)));
  Var n2 = ad::sqrt(ad::row_sum(ad::square(c2)));
  Var cos = ad::divide(ad::matmul(c1, ad::transpose(c2)), ad::add_scalar(ad::matmul(n1, ad::transpose(n2)), kEps));
  Var dist = ad::sqrt(ad::pairwise_sq_dist(c1, c2));
  Var euc = ad::pow(ad::add_scalar(dist, 1.0), -1.0);
  return ad::signed_pow(ad::hadamard(cos, euc), beta_sim);
}

Var contrastive_loss(const Var& s, double tau) {
  if (!(tau > 0.0)) throw ConfigError("contrastive_loss: tau must be > 0");
  if (s.rows() != s.cols()) throw DimensionError("contrastive_loss: similarity must be square");
  const Eigen::Index n = s.rows();
  Var log_prob = ad::row_log_softmax(ad::scale(s, 1.0 / tau));
  Var diag = ad::hadamard(log_prob, s.tape().constant(Matrix::Identity(n, n)));
  return ad::scale(ad::reduce_sum(diag), -1.0 / static_cast<double>(n));
}

Var inner_product_decode(const Var& z) { return ad::sigmoid(ad::matmul(z, ad::transpose(z))); }

}  // namespace gclgcn
