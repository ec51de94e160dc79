// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/training.hpp"

#include "gclgcn/checkpoint.hpp"
#include "gclgcn/optim.hpp"
#include "gclgcn/text_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gclgcn {

namespace {

constexpr double kKlFloor = 1e-12;
constexpr double kAdjacencyWeight = 0.1;

enum Stream : std::uint64_t {
  kAeInit = 1,
  kContrastiveInit = 2,
  kAugment = 3,
  kGcnInit = 4,
  kGraphormerInit = 5,
  kKMeans = 6,
};

bool uses_gcn(Variant v) { return v != Variant::NoGcn; }
bool uses_graphormer(Variant v) { return v != Variant::NoGraphormer; }

std::string breakdown(const LossParts& l) {
  std::ostringstream s;
  s << "L=" << l.total << " L_AE=" << l.ae << " L_w=" << l.w << " L_a1=" << l.a1 << " L_a2=" << l.a2
    << " L_clu=" << l.clu << " L_con=" << l.con;
  return s.str();
}

void require_finite(double value, const char* what, std::size_t epoch) {
  if (!std::isfinite(value)) {
    throw NumericError(std::string(what) + ": non-finite loss at epoch " + std::to_string(epoch));
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "norm";
    case Variant::NoGcn: return "-GCN";
    case Variant::NoGraphormer: return "-Graphormer";
    case Variant::NoContrastive: return "-ContrastiveLearning";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::Full, Variant::NoGcn, Variant::NoGraphormer, Variant::NoContrastive}) {
    if (name == to_string(v)) return v;
  }
  if (name == "full") return Variant::Full;
  throw ConfigError("unknown ablation variant '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (std::abs(lambda + theta + gamma - 1.0) > 1e-9) throw ConfigError("fusion weights must sum to 1");
  if (lambda < 0 || theta < 0 || gamma < 0) throw ConfigError("fusion weights must be nonnegative");
  if (!(epsilon >= 0 && epsilon <= 1)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(alpha >= 0)) throw ConfigError("alpha must be >= 0");
  if (!(beta >= 0)) throw ConfigError("beta must be >= 0");
  if (!(t > 0)) throw ConfigError("t must be > 0");
  if (!(lr > 0)) throw ConfigError("lr must be > 0");
  if (!(ae_lr > 0)) throw ConfigError("ae.lr must be > 0");
  if (n_z < 1) throw ConfigError("n_z must be >= 1");
  if (heads < 1) throw ConfigError("heads must be >= 1");
  if (layers < 1 || layers > 4) throw ConfigError("layers must be in 1..4");
  if (hidden.size() != 3) throw ConfigError("hidden needs exactly three widths");
  for (std::size_t h : hidden) {
    if (h < 1) throw ConfigError("hidden widths must be >= 1");
  }
  if (!(contrastive.p >= 0 && contrastive.p <= 1)) throw ConfigError("contrastive.p must lie in [0, 1]");
  if (!(contrastive.tau > 0)) throw ConfigError("contrastive.tau must be > 0");
  if (!(contrastive.beta_sim > 0)) throw ConfigError("contrastive.beta_sim must be > 0");
  if (!(contrastive.lr > 0)) throw ConfigError("contrastive.lr must be > 0");
  if (contrastive.hidden < 1) throw ConfigError("contrastive.hidden must be >= 1");
  if (centrality.empty()) throw ConfigError("centrality needs at least one measure");
  if (spatial_sign != 1.0 && spatial_sign != -1.0) throw ConfigError("spatial_sign must be + or -");
  (void)effective_fusion(*this);
}

Ladder encoder_ladder(std::size_t features, const ExperimentConfig& cfg) {
  Ladder l{features};
  switch (cfg.layers) {
    case 1: break;
    case 2: l.push_back(cfg.hidden[0]); break;
    case 3: l.insert(l.end(), {cfg.hidden[0], cfg.hidden[2]}); break;
    case 4: l.insert(l.end(), cfg.hidden.begin(), cfg.hidden.end()); break;
    default: throw ConfigError("layers must be in 1..4");
  }
  l.push_back(cfg.n_z);
  return l;
}

FusionWeights effective_fusion(const ExperimentConfig& cfg) {
  switch (cfg.variant) {
    case Variant::NoGcn: {
      const double s = cfg.theta + cfg.gamma;
      if (!(s > 0)) throw ConfigError("-GCN needs theta + gamma > 0");
      return {0.0, cfg.theta / s, cfg.gamma / s};
    }
    case Variant::NoGraphormer: {
      const double s = cfg.lambda + cfg.theta;
      if (!(s > 0)) throw ConfigError("-Graphormer needs lambda + theta > 0");
      return {cfg.lambda / s, cfg.theta / s, 0.0};
    }
    default: return {cfg.lambda, cfg.theta, cfg.gamma};
  }
}

PreparedGraph prepare(const Graph& g, const ExperimentConfig& cfg) {
  PreparedGraph d;
  d.x = g.features();
  d.a_norm = normalize_adjacency(g).matrix;
  d.adjacency = binary_adjacency(g);
  d.ax = d.a_norm * d.x;
  d.ax_raw = d.adjacency * d.x;
  d.centrality = composite_centrality(g, cfg.centrality).values;
  if (cfg.centrality_scale == CentralityScale::Max) {
    for (Eigen::Index j = 0; j < d.centrality.cols(); ++j) {
      const double m = d.centrality.col(j).cwiseAbs().maxCoeff();
      if (m > 0) d.centrality.col(j) /= m;
    }
  }
  d.attention = make_attention_structure(g, spatial_bias(g, cfg.spatial_mode), cfg.spatial_sign);
  d.labels = g.labels();
  if (cfg.k > 0) {
    d.k = cfg.k;
  } else if (g.num_classes()) {
    d.k = static_cast<std::size_t>(*g.num_classes());
  } else {
    throw ConfigError("k is not set and the graph has no labels");
  }
  if (d.k < 1 || d.k > g.n()) throw ConfigError("k must lie in [1, n]");
  return d;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

AEParams pretrain_ae(const PreparedGraph& data, const ExperimentConfig& cfg, std::vector<double>* losses) {
  std::mt19937_64 rng(stream_seed(cfg.seed, kAeInit));
  AEParams ae = init_ae(encoder_ladder(static_cast<std::size_t>(data.x.cols()), cfg), rng);
  std::vector<Parameter*> params;
  collect(ae, params);
  ad::AdamState adam = ad::make_adam_state(params, {.lr = cfg.ae_lr});
  auto evaluate = [&](Tape& tape) {
    Var x = tape.constant(data.x);
    return ae_loss(x, ae_forward(tape, ae, x).reconstruction);
  };
  for (std::size_t epoch = 0; epoch < cfg.ae_epochs; ++epoch) {
    Tape tape;
    Var loss = evaluate(tape);
    require_finite(loss.scalar(), "autoencoder pretraining", epoch);
    if (losses) losses->push_back(loss.scalar());
    ad::zero_grads(params);
    tape.backward(loss);
    ad::adam_step(params, adam);
  }
  if (losses) {
    Tape tape;
    losses->push_back(evaluate(tape).scalar());
  }
  return ae;
}

Matrix pretrain_contrastive(const PreparedGraph& data, const ExperimentConfig& cfg, std::vector<double>* losses) {
  std::mt19937_64 rng(stream_seed(cfg.seed, kContrastiveInit));
  const auto& cc = cfg.contrastive;
  ContrastiveParams p = init_contrastive(static_cast<std::size_t>(data.x.cols()), cc.hidden, rng);
  p.dropout = cc.p;
  p.tau = cc.tau;
  p.beta_sim = cc.beta_sim;
  std::vector<Parameter*> params;
  collect(p, params);
  ad::AdamState adam = ad::make_adam_state(params, {.lr = cc.lr});
  const std::uint64_t augment_base = stream_seed(cfg.seed, kAugment);

  auto evaluate = [&](Tape& tape, std::size_t epoch) {
    Var a = tape.constant(data.a_norm);
    Var w0 = tape.parameter(p.w0);
    Var w1 = tape.parameter(p.w1);
    Var c1 = contrastive_encoder(a, tape.constant(data.x), w0, w1);
    Var c2 = contrastive_encoder(a, tape.constant(augment_features(data.x, cc.p, augment_base + epoch)), w0, w1);
    return contrastive_loss(combined_similarity(c1, c2, cc.beta_sim), cc.tau);
  };
  for (std::size_t epoch = 0; epoch < cc.epochs; ++epoch) {
    Tape tape;
    Var loss = evaluate(tape, epoch);
    require_finite(loss.scalar(), "contrastive pretraining", epoch);
    if (losses) losses->push_back(loss.scalar());
    ad::zero_grads(params);
    tape.backward(loss);
    ad::adam_step(params, adam);
  }
  if (losses) {
    // final value on the first epoch's view so it compares with losses[0]
    Tape tape;
    losses->push_back(evaluate(tape, 0).scalar());
  }
  Tape tape;
  return contrastive_encoder(tape.constant(data.a_norm), tape.constant(data.x), tape.constant(p.w0.value),
                             tape.constant(p.w1.value))
      .value();
}

Pretrained pretrain(const PreparedGraph& data, const ExperimentConfig& cfg) {
  Pretrained out;
  out.ae = pretrain_ae(data, cfg, &out.ae_losses);
  if (cfg.variant == Variant::NoContrastive) {
    out.x_c = Matrix::Zero(data.x.rows(), data.x.cols());
  } else {
    out.x_c = pretrain_contrastive(data, cfg, &out.contrastive_losses);
  }
  return out;
}

std::vector<Parameter*> ModelState::trainable(Variant v) {
  std::vector<Parameter*> out;
  collect(ae, out);
  if (uses_gcn(v)) collect(gcn, out);
  if (uses_graphormer(v)) collect(graphormer, out);
  out.push_back(&centroids);
  return out;
}

std::vector<Parameter*> ModelState::tensors() {
  std::vector<Parameter*> out;
  collect(ae, out);
  collect(gcn, out);
  collect(graphormer, out);
  out.push_back(&centroids);
  out.push_back(&x_c);
  return out;
}

ModelState init_model(const PreparedGraph& data, const ExperimentConfig& cfg, const Pretrained& pre,
                      std::vector<int>* kmeans_labels) {
  const Ladder ladder = encoder_ladder(static_cast<std::size_t>(data.x.cols()), cfg);
  if (pre.ae.encoder.size() + 1 != ladder.size() ||
      pre.ae.encoder.back().weight.value.cols() != static_cast<Eigen::Index>(cfg.n_z)) {
    throw MismatchError("pretrained autoencoder does not match the configured ladder");
  }
  ModelState s;
  s.ae = pre.ae;
  std::mt19937_64 gcn_rng(stream_seed(cfg.seed, kGcnInit));
  s.gcn = init_gcn(ladder, gcn_rng);
  std::mt19937_64 t_rng(stream_seed(cfg.seed, kGraphormerInit));
  s.graphormer = init_graphormer(ladder, static_cast<std::size_t>(data.centrality.cols()), cfg.heads, t_rng);
  s.x_c = Parameter("contrastive.x_c", cfg.variant == Variant::NoContrastive
                                           ? Matrix(Matrix::Zero(data.x.rows(), data.x.cols()))
                                           : pre.x_c);
  if (s.x_c.value.rows() != data.x.rows() || s.x_c.value.cols() != data.x.cols()) {
    throw MismatchError("X_c shape does not match the features");
  }

  Tape tape;
  Matrix z = ae_forward(tape, s.ae, tape.constant(data.x)).hidden.back().value();
  if (cfg.centroid_init == CentroidInit::Fused) {
    // centroids do not enter Z_L, so any placeholder works for this pass
    s.centroids = Parameter("cluster.centroids", Matrix::Zero(static_cast<Eigen::Index>(data.k), z.cols()));
    Tape fused;
    z = forward(fused, s, data, cfg).z_l.value();
  }
  const KMeansResult km = kmeans(z, data.k, stream_seed(cfg.seed, kKMeans));
  s.centroids = Parameter("cluster.centroids", km.centroids);
  if (kmeans_labels) *kmeans_labels = km.labels;
  return s;
}

Var fused_input(const Var& h_ae, const Var& z_prev, double eps) {
  if (h_ae.rows() != z_prev.rows() || h_ae.cols() != z_prev.cols()) {
    throw DimensionError("fused_input: shape mismatch");
  }
  if (eps == 0.0) return z_prev;
  if (eps == 1.0) return h_ae;
  return ad::add(ad::scale(h_ae, eps), ad::scale(z_prev, 1.0 - eps));
}

Var fuse_final(const Var* z_gcn, const Var& z_ae, const Var* z_t, const Var& a_norm, FusionWeights w) {
  Var mix = ad::scale(z_ae, w.theta);
  if (z_gcn) mix = ad::add(mix, ad::scale(*z_gcn, w.lambda));
  if (z_t) mix = ad::add(mix, ad::scale(*z_t, w.gamma));
  return ad::matmul(a_norm, mix);
}

Var soft_assign(const Var& z, const Var& centroids, double t) {
  Var d = ad::pairwise_sq_dist(z, centroids);
  Var kernel = ad::pow(ad::add_scalar(ad::scale(d, 1.0 / t), 1.0), -(t + 1.0) / 2.0);
  return ad::divide_rows(kernel, ad::row_sum(kernel));
}

Matrix target_distribution(const Matrix& q) {
  const RowVector f = q.colwise().sum();
  Matrix p = q.array().square().rowwise() / f.array();
  const Vector rows = p.rowwise().sum();
  p.array().colwise() /= rows.array();
  return p;
}

Var kl_div(const Var& num, const Var& den) {
  Var ln = ad::log(ad::clamp_min(num, kKlFloor));
  Var ld = ad::log(ad::clamp_min(den, kKlFloor));
  return ad::reduce_sum(ad::hadamard(num, ad::sub(ln, ld)));
}

Matrix centroid_gradient(const Matrix& z, const Matrix& centroids, const Matrix& p, const Matrix& q, double t) {
  Matrix g = Matrix::Zero(centroids.rows(), centroids.cols());
  for (Eigen::Index j = 0; j < centroids.rows(); ++j) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const RowVector diff = z.row(i) - centroids.row(j);
      const double w = (p(i, j) - q(i, j)) / (1.0 + diff.squaredNorm() / t);
      g.row(j) -= ((t + 1.0) / t) * w * diff;
    }
  }
  return g;
}

std::vector<int> assign_labels(const Matrix& q) {
  std::vector<int> labels(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < q.cols(); ++j) {
      if (q(i, j) > q(i, best)) best = j;
    }
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

Forward forward(Tape& tape, ModelState& state, const PreparedGraph& data, const ExperimentConfig& cfg) {
  Forward out;
  Var x = tape.constant(data.x);
  Var a = tape.constant(data.a_norm);
  out.ae = ae_forward(tape, state.ae, x);
  const Var x0 = tape.constant(data.x + state.x_c.value);
  const double eps = cfg.epsilon;

  if (uses_gcn(cfg.variant)) {
    Var z = x0;
    for (std::size_t l = 0; l < state.gcn.encoder.size(); ++l) {
      if (l > 0) z = fused_input(out.ae.hidden[l - 1], z, eps);
      z = gcn_layer(a, z, tape.parameter(state.gcn.encoder[l]), true);
      out.gcn_hidden.push_back(z);
    }
    for (std::size_t l = 0; l < state.gcn.decoder.size(); ++l) {
      z = gcn_layer(a, z, tape.parameter(state.gcn.decoder[l]), l + 1 < state.gcn.decoder.size());
    }
    out.gcn_reconstruction = z;
  }

  if (uses_graphormer(cfg.variant)) {
    Var c = tape.constant(data.centrality);
    const int heads = state.graphormer.heads;
    Var z = x0;
    for (std::size_t l = 0; l < state.graphormer.encoder.size(); ++l) {
      if (l > 0) z = fused_input(out.ae.hidden[l - 1], z, eps);
      z = graphormer_layer(z, c, data.attention, bind(tape, state.graphormer.encoder[l]), heads, true);
      out.t_hidden.push_back(z);
    }
    for (std::size_t l = 0; l < state.graphormer.decoder.size(); ++l) {
      z = graphormer_layer(z, c, data.attention, bind(tape, state.graphormer.decoder[l]), heads,
                           l + 1 < state.graphormer.decoder.size());
    }
    out.t_reconstruction = z;
  }

  const Var* zg = uses_gcn(cfg.variant) ? &out.gcn_hidden.back() : nullptr;
  const Var* zt = uses_graphormer(cfg.variant) ? &out.t_hidden.back() : nullptr;
  out.z_l = fuse_final(zg, out.ae.hidden.back(), zt, a, effective_fusion(cfg));
  Var centroids = tape.parameter(state.centroids);
  out.q = soft_assign(out.z_l, centroids, cfg.t);
  out.q_prime = soft_assign(out.ae.hidden.back(), centroids, cfg.t);
  return out;
}

LossParts CompositeLoss::values() const {
  LossParts l;
  l.total = total.scalar();
  l.ae = ae.scalar();
  l.w = w.scalar();
  l.a1 = a1.valid() ? a1.scalar() : 0.0;
  l.a2 = a2.valid() ? a2.scalar() : 0.0;
  l.clu = clu.scalar();
  l.con = con.scalar();
  return l;
}

CompositeLoss loss_total(const Forward& fwd, const PreparedGraph& data, const ExperimentConfig& cfg,
                         const Matrix& p) {
  Tape& tape = fwd.q.tape();
  const bool gcn = uses_gcn(cfg.variant);
  const bool graphormer = uses_graphormer(cfg.variant);
  Var target_w = tape.constant(cfg.raw_ax_target ? data.ax_raw : data.ax);
  Var target_ae = tape.constant(data.ax);
  Var adjacency = tape.constant(data.adjacency);

  CompositeLoss L;
  if (gcn && graphormer) {
    L.w = ad::mse(ad::scale(ad::add(fwd.gcn_reconstruction, fwd.t_reconstruction), 0.5), target_w);
  } else {
    L.w = ad::mse(gcn ? fwd.gcn_reconstruction : fwd.t_reconstruction, target_w);
  }
  Var structure;
  if (gcn) {
    L.a1 = ad::mse(inner_product_decode(fwd.gcn_hidden.back()), adjacency);
    structure = L.a1;
  }
  if (graphormer) {
    L.a2 = ad::mse(inner_product_decode(fwd.t_hidden.back()), adjacency);
    structure = gcn ? ad::add(L.a1, L.a2) : L.a2;
  }
  L.ae = ad::mse(fwd.ae.reconstruction, target_ae);
  L.clu = kl_div(tape.constant(p), fwd.q);
  L.con = kl_div(fwd.q, fwd.q_prime);
  Var reconstruction = ad::add(ad::add(L.w, ad::scale(structure, kAdjacencyWeight)), L.ae);
  L.total = ad::add(ad::add(reconstruction, ad::scale(L.clu, cfg.alpha)), ad::scale(L.con, cfg.beta));
  return L;
}

TrainResult train(const PreparedGraph& data, const ExperimentConfig& cfg, const Pretrained& pre,
                  const TrainOptions& options) {
  cfg.validate();
  TrainResult result;
  result.state = init_model(data, cfg, pre, &result.initial_labels);
  ModelState& state = result.state;
  std::vector<Parameter*> params = state.trainable(cfg.variant);
  ad::AdamState adam = ad::make_adam_state(params, {.lr = cfg.lr});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Tape tape;
    Forward fwd = forward(tape, state, data, cfg);
    const Matrix p = target_distribution(fwd.q.value());
    CompositeLoss loss = loss_total(fwd, data, cfg, p);
    const LossParts parts = loss.values();
    if (!std::isfinite(parts.total)) {
      if (!options.failure_checkpoint.empty()) {
        std::vector<Parameter*> all = state.tensors();
        std::vector<const Parameter*> view(all.begin(), all.end());
        write_checkpoint(options.failure_checkpoint, view);
      }
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ": " + breakdown(parts));
    }

    EpochRecord record{epoch, parts, std::nullopt};
    if (data.labels) record.metrics = evaluate(assign_labels(fwd.q.value()), *data.labels, cfg.nmi);
    result.history.push_back(record);

    if (options.on_epoch) {
      Parameter c("c", state.centroids.value);
      Tape side;
      Var q = soft_assign(side.constant(fwd.z_l.value()), side.parameter(c), cfg.t);
      side.backward(kl_div(side.constant(p), q));
      options.on_epoch({epoch, fwd.z_l.value(), fwd.ae.hidden.back().value(), fwd.q.value(), fwd.q_prime.value(), p,
                        state.centroids.value, c.grad, parts});
    }

    ad::zero_grads(params);
    tape.backward(loss.total);
    ad::adam_step(params, adam);
  }

  Tape tape;
  Forward fwd = forward(tape, state, data, cfg);
  result.q = fwd.q.value();
  result.labels = assign_labels(result.q);
  return result;
}

TrainResult train(const Graph& g, const ExperimentConfig& cfg, const Pretrained* pre, const TrainOptions& options) {
  cfg.validate();
  const PreparedGraph data = prepare(g, cfg);
  if (pre) return train(data, cfg, *pre, options);
  const Pretrained fresh = pretrain(data, cfg);
  return train(data, cfg, fresh, options);
}

MetricRow ablate(const Graph& g, ExperimentConfig cfg, Variant variant) {
  if (!g.labels()) throw ContractError("ablate needs ground-truth labels");
  cfg.variant = variant;
  const TrainResult r = train(g, cfg);
  return evaluate(r.labels, *g.labels(), cfg.nmi);
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,L,L_AE,L_w,L_a1,L_a2,L_clu,L_con,acc,nmi,ari,f1\n";
  for (const auto& r : history) {
    const LossParts& l = r.loss;
    out << r.epoch;
    for (double v : {l.total, l.ae, l.w, l.a1, l.a2, l.clu, l.con}) out << ',' << format_double(v);
    if (r.metrics) {
      for (double v : {r.metrics->acc, r.metrics->nmi, r.metrics->ari, r.metrics->f1}) out << ',' << format_double(v);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_history_csv(out, history);
}

}  // namespace gclgcn
