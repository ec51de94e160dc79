// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.
//   acceptance [--only NAME] [--cora DIR]
#include "fixtures.hpp"
#include "oracles.hpp"

#include "gclgcn/config.hpp"
#include "gclgcn/experiments.hpp"
#include "gclgcn/optim.hpp"
#include "gclgcn/text_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

using namespace gclgcn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  if (!o.pass) ++g_failures;
}

double max_row_sum_error(const Matrix& m) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) worst = std::max(worst, std::abs(m.row(i).sum() - 1.0));
  return worst;
}

// --- centrality ---------------------------------------------------------------------

Outcome centrality_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 50);
  const double ps[] = {0.1, 0.3, 0.6};
  double worst_b = 0.0;
  bool exact = true;
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = testing::erdos_renyi(size(rng), ps[trial % 3], 1000 + static_cast<std::uint64_t>(trial));
    const Vector b = betweenness_centrality(g);
    const auto want_b = testing::betweenness_oracle(g);
    for (std::size_t v = 0; v < g.n(); ++v) worst_b = std::max(worst_b, std::abs(b(static_cast<Eigen::Index>(v)) - want_b[v]));

    const Vector d = degree_centrality(g);
    std::size_t max_deg = 0;
    for (std::size_t v = 0; v < g.n(); ++v) max_deg = std::max(max_deg, g.neighbors(v).size());
    for (std::size_t v = 0; v < g.n(); ++v) {
      const double want = max_deg == 0 ? 0.0 : static_cast<double>(g.neighbors(v).size()) / static_cast<double>(max_deg);
      exact = exact && d(static_cast<Eigen::Index>(v)) == want;
    }
    const Vector c = closeness_centrality(g);
    const auto want_c = testing::closeness_oracle(g);
    for (std::size_t v = 0; v < g.n(); ++v) exact = exact && c(static_cast<Eigen::Index>(v)) == want_c[v];
  }
  const double secs = seconds_since(t0);
  return {worst_b <= 1e-9 && exact && secs < 30.0,
          "100 graphs, max betweenness error " + fmt(worst_b) + " (tol 1e-9), degree/closeness " +
              (exact ? "exact" : "MISMATCH") + ", " + fmt(secs) + " s (limit 30)"};
}

// --- gradients ----------------------------------------------------------------------

double ae_grad(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AEParams p = init_ae({8, 7, 5, 3}, rng);
  const Matrix x = testing::random_matrix(6, 8, rng);
  std::vector<Parameter*> ps;
  collect(p, ps);
  return ad::finite_difference_check(
      [&](Tape& t) {
        Var xv = t.constant(x);
        return ae_loss(xv, ae_forward(t, p, xv).reconstruction);
      },
      ps);
}

double gcn_grad(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Graph g = testing::erdos_renyi(6, 0.4, seed);
  const Matrix a = normalize_adjacency(g).matrix;
  Parameter z("z", testing::random_matrix(6, 4, rng));
  Parameter w("w", testing::random_matrix(4, 3, rng));
  const Matrix target = testing::random_matrix(6, 3, rng);
  std::vector<Parameter*> ps{&z, &w};
  return ad::finite_difference_check(
      [&](Tape& t) { return ad::mse(gcn_layer(t.constant(a), t.parameter(z), t.parameter(w), true), t.constant(target)); },
      ps);
}

double graphormer_grad(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Graph g = testing::erdos_renyi(5, 0.5, seed, 3);
  const auto structure = make_attention_structure(g, spatial_bias(g, SpatialMode::Euclidean));
  const Matrix c = composite_centrality(g, {CentralityMeasure::Degree, CentralityMeasure::Betweenness,
                                            CentralityMeasure::Closeness})
                       .values;
  GraphormerParams p = init_graphormer({3, 4}, 3, 2, rng);
  Parameter z("z", g.features());
  const Matrix target = testing::random_matrix(5, 4, rng);
  std::vector<Parameter*> ps{&z};
  collect(p, ps);
  return ad::finite_difference_check(
      [&](Tape& t) {
        return ad::mse(graphormer_layer(t.parameter(z), t.constant(c), structure, bind(t, p.encoder[0]), 2, true),
                       t.constant(target));
      },
      ps);
}

double contrastive_grad(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Graph g = testing::erdos_renyi(6, 0.4, seed, 4);
  const Matrix a = normalize_adjacency(g).matrix;
  ContrastiveParams p = init_contrastive(4, 5, rng);
  const Matrix x = testing::random_matrix(6, 4, rng);
  const Matrix xa = augment_features(x, 0.2, seed);
  std::vector<Parameter*> ps;
  collect(p, ps);
  return ad::finite_difference_check(
      [&](Tape& t) {
        Var w0 = t.parameter(p.w0), w1 = t.parameter(p.w1);
        Var c1 = contrastive_encoder(t.constant(a), t.constant(x), w0, w1);
        Var c2 = contrastive_encoder(t.constant(a), t.constant(xa), w0, w1);
        return contrastive_loss(combined_similarity(c1, c2, 1.0), 0.5);
      },
      ps);
}

double composite_grad(std::uint64_t seed) {
  const Graph g = testing::small_sbm(seed, 4, 5);
  ExperimentConfig cfg = testing::tiny_config(seed);
  cfg.n_z = 2;
  cfg.hidden = {4, 3, 5};
  cfg.ae_epochs = 2;
  cfg.contrastive.epochs = 2;
  cfg.contrastive.hidden = 4;
  const PreparedGraph data = prepare(g, cfg);
  ModelState state = init_model(data, cfg, pretrain(data, cfg));
  Matrix p;
  {
    Tape t;
    p = target_distribution(forward(t, state, data, cfg).q.value());
  }
  std::vector<Parameter*> params = state.trainable(cfg.variant);
  return ad::finite_difference_check(
      [&](Tape& t) { return loss_total(forward(t, state, data, cfg), data, cfg, p).total; }, params,
      {.h = 1e-6, .max_coords_per_param = 0});
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  struct Part {
    const char* name;
    std::function<double(std::uint64_t)> fn;
  };
  const Part parts[] = {{"ae", ae_grad},
                        {"gcn", gcn_grad},
                        {"graphormer", graphormer_grad},
                        {"contrastive", contrastive_grad},
                        {"composite", composite_grad}};
  bool ok = true;
  std::string detail;
  for (const auto& part : parts) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) worst = std::max(worst, part.fn(seed));
    ok = ok && worst <= 1e-4;
    detail += std::string(part.name) + " " + fmt(worst) + ", ";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  return {ok, "max relative error over 10 seeds: " + detail + "tol 1e-4, " + fmt(secs) + " s (limit 120)"};
}

// --- centroid gradient ------------------------------------------------------------

Outcome centroid_crosscheck() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Matrix z = testing::random_matrix(30, 5, rng);
    Parameter c("c", testing::random_matrix(4, 5, rng));
    Tape side;
    const Matrix q = soft_assign(side.constant(z), side.constant(c.value), 1.0).value();
    const Matrix p = target_distribution(q);
    c.zero_grad();
    Tape t;
    t.backward(kl_div(t.constant(p), soft_assign(t.constant(z), t.parameter(c), 1.0)));
    worst = std::max(worst, (centroid_gradient(z, c.value, p, q, 1.0) - c.grad).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-6, "20 seeds (n=30, k=4, n_z=5), max abs difference " + fmt(worst) + " (tol 1e-6)"};
}

// --- SBM runs -----------------------------------------------------------------------

Graph acceptance_sbm() {
  SbmSpec spec;
  spec.block_sizes = {50, 50, 50};
  spec.p_in = 0.15;
  spec.p_out = 0.01;
  spec.noise_std = 1.0;
  spec.block_means = separated_block_means(3, 16, 3.0);
  return generate_sbm(spec, 0);
}

ExperimentConfig acceptance_config() {
  ExperimentConfig cfg = preset_config("cora");
  cfg.epochs = 200;
  cfg.seed = 0;
  return cfg;
}

struct InvariantTracker {
  double row_error = 0.0;
  double min_clu = std::numeric_limits<double>::infinity();
  double min_con = std::numeric_limits<double>::infinity();
  double first_epoch_centroid = 0.0;
  std::size_t epochs = 0;

  void observe(const EpochObservation& o, double t) {
    ++epochs;
    row_error = std::max({row_error, max_row_sum_error(o.q), max_row_sum_error(o.q_prime), max_row_sum_error(o.p)});
    min_clu = std::min(min_clu, o.loss.clu);
    min_con = std::min(min_con, o.loss.con);
    if (o.epoch == 1) {
      first_epoch_centroid = (centroid_gradient(o.z_l, o.centroids, o.p, o.q, t) - o.centroid_grad).cwiseAbs().maxCoeff();
    }
  }
};

// Q built from cyclic shifts of random rows, so every column sums to the same f.
bool equal_frequency_argmax(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  const Eigen::Index k = 2 + static_cast<Eigen::Index>(seed % 5);
  const Eigen::Index m = 10;
  Matrix base(m, k);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < m; ++i) base.row(i) /= base.row(i).sum();
  Matrix q(m * k, k);
  for (Eigen::Index s = 0; s < k; ++s)
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < k; ++j) q(s * m + i, (j + s) % k) = base(i, j);
  return assign_labels(target_distribution(q)) == assign_labels(q);
}

Outcome distribution_invariants(const PreparedGraph& data, const Pretrained& pre) {
  ExperimentConfig cfg = acceptance_config();
  cfg.epochs = 50;
  InvariantTracker tr;
  TrainOptions opt;
  opt.on_epoch = [&](const EpochObservation& o) { tr.observe(o, cfg.t); };
  train(data, cfg, pre, opt);
  bool argmax_ok = true;
  for (std::uint64_t s = 0; s < 100; ++s) argmax_ok = argmax_ok && equal_frequency_argmax(s);
  const bool ok = tr.epochs == 50 && tr.row_error <= 1e-9 && tr.min_clu >= 0.0 && tr.min_con >= 0.0 && argmax_ok &&
                  tr.first_epoch_centroid <= 1e-6;
  return {ok, std::to_string(tr.epochs) + " epochs, max |row sum - 1| " + fmt(tr.row_error) +
                  " (tol 1e-9), min L_clu " + fmt(tr.min_clu) + ", min L_con " + fmt(tr.min_con) +
                  ", equal-frequency argmax " + (argmax_ok ? "preserved" : "BROKEN") + " in 100 cases" +
                  ", epoch-1 centroid gradient diff " + fmt(tr.first_epoch_centroid)};
}

Outcome end_to_end(const Graph& g) {
  const auto t0 = Clock::now();
  const ExperimentConfig cfg = acceptance_config();
  InvariantTracker tr;
  TrainOptions opt;
  opt.on_epoch = [&](const EpochObservation& o) { tr.observe(o, cfg.t); };
  const TrainResult r = train(g, cfg, nullptr, opt);
  const double secs = seconds_since(t0);
  const MetricRow m = evaluate(r.labels, *g.labels(), cfg.nmi);
  double best_acc = 0.0;
  std::size_t best_epoch = 0;
  for (const auto& h : r.history) {
    if (h.metrics && h.metrics->acc > best_acc) {
      best_acc = h.metrics->acc;
      best_epoch = h.epoch;
    }
  }
  const bool ok = m.acc >= 0.95 && m.nmi >= 0.85 && m.ari >= 0.85 && secs < 300.0;
  return {ok, "ACC " + fmt(m.acc) + " (>= 0.95), NMI " + fmt(m.nmi) + " (>= 0.85), ARI " + fmt(m.ari) +
                  " (>= 0.85), " + fmt(secs) + " s (limit 300); best epoch ACC " + fmt(best_acc) + " at " +
                  std::to_string(best_epoch) + ", epoch-1 centroid gradient diff " + fmt(tr.first_epoch_centroid)};
}

// --- metrics ------------------------------------------------------------------------

Outcome metrics_oracle() {
  std::mt19937_64 rng(99);
  std::size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    const std::size_t n = 1 + rng() % 40;
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
      truth[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    }
    if (std::abs(accuracy(pred, truth) - testing::brute_force_accuracy(pred, truth, k)) <= 1e-12) ++agree;
  }
  double sum_ari = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int> a(200), b(200);
    for (std::size_t i = 0; i < 200; ++i) {
      a[i] = static_cast<int>(rng() % 5);
      b[i] = static_cast<int>(rng() % 5);
    }
    sum_ari += ari(a, b);
  }
  const double mean_ari = std::abs(sum_ari / 1000.0);
  bool identical = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(30);
    for (auto& v : a) v = static_cast<int>(rng() % 4);
    a[0] = 0;
    a[1] = 1;
    const MetricRow m = evaluate(a, a);
    identical = identical && m.acc == 1.0 && m.nmi == 1.0 && m.ari == 1.0 && m.f1 == 1.0;
  }
  return {agree == 1000 && mean_ari <= 0.05 && identical,
          "Hungarian = brute force in " + std::to_string(agree) + "/1000, |mean ARI| " + fmt(mean_ari) +
              " (<= 0.05), identical partitions " + (identical ? "all 1.0" : "NOT 1.0")};
}

// --- harness ------------------------------------------------------------------------

std::size_t data_rows(const std::string& csv) {
  std::size_t n = 0;
  for (char c : csv) n += c == '\n';
  return n == 0 ? 0 : n - 1;
}

std::string first_column_labels(const ResultTable& t) {
  std::string out;
  for (const auto& r : t.rows) out += (out.empty() ? "" : "|") + r.keys.at(1);
  return out;
}

Outcome harness_schemas() {
  const Graph g = testing::small_sbm(5, 12, 6);
  ExperimentConfig cfg = testing::tiny_config(3);
  cfg.epochs = 3;
  const std::string dataset = "sbm";

  const ResultTable ab = ablation_study(g, cfg, dataset);
  const bool ab_ok = ab.key_columns == std::vector<std::string>{"dataset", "variant"} &&
                     first_column_labels(ab) == "norm|-GCN|-Graphormer|-ContrastiveLearning" &&
                     data_rows(ab.csv()) == 4 && ablation_study(g, cfg, dataset).csv() == ab.csv();

  const ResultTable enc = encoding_study(g, cfg, dataset);
  const bool enc_ok = first_column_labels(enc) == "GCL-GCN|DC, BC and CC + SPD|DC + ED|BC + ED|CC + ED" &&
                      data_rows(enc.csv()) == 5 && encoding_study(g, cfg, dataset).csv() == enc.csv();

  ExperimentConfig sweep_cfg = cfg;
  sweep_cfg.epochs = 1;
  const auto values = loss_weight_values();
  const ResultTable lw = sweep_loss_weights(g, sweep_cfg, dataset, values, values);
  const bool lw_ok = data_rows(lw.csv()) == 49 && sweep_loss_weights(g, sweep_cfg, dataset, values, values).csv() == lw.csv();

  return {ab_ok && enc_ok && lw_ok, std::string("ablation 4 rows ") + (ab_ok ? "ok" : "BAD") + ", encodings 5 rows " +
                                        (enc_ok ? "ok" : "BAD") + ", loss sweep " + std::to_string(lw.rows.size()) +
                                        " rows " + (lw_ok ? "ok" : "BAD") + ", reruns byte-identical"};
}

void cora_sanity(const std::string& dir) {
  if (dir.empty()) {
    std::cout << "SKIP cora-sanity (optional, not a gate): no dataset directory; pass --cora DIR with "
                 "features.csv, edges.txt, labels.txt"
              << std::endl;
    return;
  }
  const std::filesystem::path d(dir);
  const Graph g = load_graph(d / "features.csv", d / "edges.txt", d / "labels.txt");
  const auto t0 = Clock::now();
  const TrainResult r = train(g, preset_config("cora"));
  const MetricRow m = evaluate(r.labels, *g.labels());
  std::cout << "INFO cora-sanity (optional, not a gate): ACC " << fmt(m.acc) << " (target >= 0.60), NMI "
            << fmt(m.nmi) << ", ARI " << fmt(m.ari) << ", F1 " << fmt(m.f1) << ", " << fmt(seconds_since(t0)) << " s"
            << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // same allocator setting as the command-line tool
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, -1);
#endif
  std::string only, cora;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = argv[++i];
    else if (!std::strcmp(argv[i], "--cora") && i + 1 < argc) cora = argv[++i];
    else {
      std::cerr << "usage: acceptance [--only NAME] [--cora DIR]\n";
      return 2;
    }
  }
  auto run = [&](const std::string& name, const std::function<Outcome()>& fn) {
    if (!only.empty() && only != name) return;
    try {
      report(name, fn());
    } catch (const std::exception& e) {
      report(name, {false, std::string("threw: ") + e.what()});
    }
  };

  run("centrality-oracle", centrality_oracle);
  run("gradient-suite", gradient_suite);
  run("centroid-gradient", centroid_crosscheck);
  run("metrics-oracle", metrics_oracle);
  run("harness-schemas", harness_schemas);

  const Graph sbm = acceptance_sbm();
  if (only.empty() || only == "distribution-invariants") {
    const ExperimentConfig cfg = acceptance_config();
    const PreparedGraph data = prepare(sbm, cfg);
    const Pretrained pre = pretrain(data, cfg);
    run("distribution-invariants", [&] { return distribution_invariants(data, pre); });
  }
  run("end-to-end-sbm", [&] { return end_to_end(sbm); });
  if (only.empty() || only == "cora-sanity") cora_sanity(cora);

  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
