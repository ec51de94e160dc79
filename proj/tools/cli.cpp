// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "gclgcn/checkpoint.hpp"
#include "gclgcn/config.hpp"
#include "gclgcn/experiments.hpp"
#include "gclgcn/text_io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

namespace gclgcn {

namespace fs = std::filesystem;

namespace {

struct ExperimentArgs {
  std::string config;
  std::string preset;
  std::vector<std::string> settings;
  std::string features, edges, labels;
  std::string out;
};

void add_experiment_flags(CLI::App* sub, ExperimentArgs& a, bool needs_out) {
  sub->add_option("--config", a.config, "key=value experiment file");
  sub->add_option("--preset", a.preset, "hyperparameter preset (cora, acm, dblp, citeseer, hhar, reuters)");
  sub->add_option("--set", a.settings, "override one key, e.g. --set epochs=10")->take_all();
  sub->add_option("--features", a.features, "features CSV (overrides the config)");
  sub->add_option("--edges", a.edges, "edge list (overrides the config)");
  sub->add_option("--labels", a.labels, "labels file (overrides the config)");
  auto* out = sub->add_option("--out", a.out, "output directory");
  if (needs_out) out->required();
}

ConfigFile load_config(const ExperimentArgs& a) {
  ConfigFile cfg;
  if (!a.config.empty()) {
    cfg = parse_config(a.config);
  } else if (!a.preset.empty()) {
    cfg = parse_config_text("preset = " + a.preset);
  } else {
    throw ConfigError("either --config or --preset is required");
  }
  for (const auto& s : a.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_setting(cfg, trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)));
  }
  if (!a.features.empty()) cfg.features = a.features;
  if (!a.edges.empty()) cfg.edges = a.edges;
  if (!a.labels.empty()) cfg.labels = a.labels;
  cfg.experiment.validate();
  return cfg;
}

Graph load_dataset(const ConfigFile& cfg) {
  if (!cfg.features || !cfg.edges) throw ConfigError("dataset needs features and edges paths");
  return load_graph(*cfg.features, *cfg.edges, cfg.labels);
}

std::string dataset_name(const ConfigFile& cfg) { return cfg.dataset.empty() ? "graph" : cfg.dataset; }

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

std::vector<double> parse_doubles(const std::string& list, const char* what) {
  std::vector<double> out;
  for (auto part : split(list, ',')) out.push_back(parse_double(trim(part), what));
  return out;
}

void emit_table(const ResultTable& table, const std::string& out_dir, std::ostream& out) {
  const std::string csv = table.csv();
  if (!out_dir.empty()) write_text(prepare_out(out_dir) / "results.csv", csv);
  out << csv;
}

void print_metrics(std::ostream& out, const MetricRow& m) {
  out << "acc,nmi,ari,f1,composite\n"
      << format_double(m.acc) << ',' << format_double(m.nmi) << ',' << format_double(m.ari) << ','
      << format_double(m.f1) << ',' << format_double(m.composite()) << '\n';
}

// --- subcommands -------------------------------------------------------------------

struct SbmArgs {
  std::string blocks = "50,50,50";
  double p_in = 0.15;
  double p_out = 0.01;
  std::size_t dims = 16;
  double separation = 3.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_sbm(const SbmArgs& a, std::ostream& out) {
  SbmSpec spec;
  for (auto part : split(a.blocks, ',')) {
    const long long b = parse_integer(trim(part), "--blocks");
    if (b < 1) throw ConfigError("--blocks entries must be >= 1");
    spec.block_sizes.push_back(static_cast<std::size_t>(b));
  }
  spec.p_in = a.p_in;
  spec.p_out = a.p_out;
  spec.noise_std = a.noise;
  spec.block_means = separated_block_means(spec.block_sizes.size(), a.dims, a.separation * a.noise);
  spec.validate();
  const Graph g = generate_sbm(spec, a.seed);
  save_graph(g, prepare_out(a.out));
  out << "wrote " << g.n() << " nodes, " << g.edges().size() << " edges to " << a.out << '\n';
  return kExitOk;
}

int cmd_centrality(const std::string& features, const std::string& edges, const std::string& measures,
                   const std::string& out_path, std::ostream& out) {
  std::vector<CentralityMeasure> ms;
  for (auto part : split(measures, ',')) ms.push_back(parse_centrality_measure(trim(part)));
  const Graph g = load_graph(features, edges);
  const CentralityMatrix c = composite_centrality(g, ms);
  if (out_path.empty()) {
    write_matrix_csv(out, c.values);
  } else {
    write_matrix_csv(fs::path(out_path), c.values);
  }
  return kExitOk;
}

int cmd_pretrain(const ExperimentArgs& a, std::ostream& out) {
  const ConfigFile cfg = load_config(a);
  const Graph g = load_dataset(cfg);
  const PreparedGraph data = prepare(g, cfg.experiment);
  Pretrained pre = pretrain(data, cfg.experiment);
  const fs::path dir = prepare_out(a.out);

  std::vector<Parameter*> tensors;
  collect(pre.ae, tensors);
  Parameter x_c("contrastive.x_c", pre.x_c);
  tensors.push_back(&x_c);
  std::vector<const Parameter*> view(tensors.begin(), tensors.end());
  write_checkpoint(dir / "pretrain.gclc", view);

  std::ofstream losses(dir / "pretrain_losses.csv", std::ios::binary);
  losses << "phase,epoch,loss\n";
  for (std::size_t i = 0; i < pre.ae_losses.size(); ++i) losses << "ae," << i << ',' << format_double(pre.ae_losses[i]) << '\n';
  for (std::size_t i = 0; i < pre.contrastive_losses.size(); ++i) {
    losses << "contrastive," << i << ',' << format_double(pre.contrastive_losses[i]) << '\n';
  }
  if (!pre.ae_losses.empty()) {
    out << "autoencoder loss " << format_double(pre.ae_losses.front()) << " -> " << format_double(pre.ae_losses.back())
        << '\n';
  }
  if (!pre.contrastive_losses.empty()) {
    out << "contrastive loss " << format_double(pre.contrastive_losses.front()) << " -> "
        << format_double(pre.contrastive_losses.back()) << '\n';
  }
  return kExitOk;
}

int cmd_train(const ExperimentArgs& a, std::ostream& out) {
  const ConfigFile cfg = load_config(a);
  const Graph g = load_dataset(cfg);
  const fs::path dir = prepare_out(a.out);
  TrainOptions options;
  options.failure_checkpoint = dir / "last_good.gclc";
  TrainResult r = train(g, cfg.experiment, nullptr, options);

  write_history_csv(dir / "history.csv", r.history);
  write_labels(dir / "labels.txt", r.labels);
  std::vector<Parameter*> tensors = r.state.tensors();
  std::vector<const Parameter*> view(tensors.begin(), tensors.end());
  write_checkpoint(dir / "model.gclc", view);
  write_text(dir / "config.cfg", write_config(cfg));
  if (g.labels()) print_metrics(out, evaluate(r.labels, *g.labels(), cfg.experiment.nmi));
  return kExitOk;
}

int cmd_ablate(const ExperimentArgs& a, std::ostream& out) {
  const ConfigFile cfg = load_config(a);
  emit_table(ablation_study(load_dataset(cfg), cfg.experiment, dataset_name(cfg)), a.out, out);
  return kExitOk;
}

int cmd_layers(const ExperimentArgs& a, const std::string& depth_list, std::ostream& out) {
  const ConfigFile cfg = load_config(a);
  std::vector<std::size_t> depths;
  for (auto part : split(depth_list, ',')) {
    const long long d = parse_integer(trim(part), "--depths");
    if (d < 1) throw ConfigError("--depths entries must be >= 1");
    depths.push_back(static_cast<std::size_t>(d));
  }
  emit_table(layer_study(load_dataset(cfg), cfg.experiment, dataset_name(cfg), depths), a.out, out);
  return kExitOk;
}

int cmd_encodings(const ExperimentArgs& a, std::ostream& out) {
  const ConfigFile cfg = load_config(a);
  emit_table(encoding_study(load_dataset(cfg), cfg.experiment, dataset_name(cfg)), a.out, out);
  return kExitOk;
}

struct SweepArgs {
  std::string kind = "fusion";
  std::string lambdas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8";
  std::string thetas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8";
  std::string alphas;
  std::string betas;
};

int cmd_sweep(const ExperimentArgs& a, const SweepArgs& s, std::ostream& out, std::ostream& err) {
  const ConfigFile cfg = load_config(a);
  const Graph g = load_dataset(cfg);
  const std::string name = dataset_name(cfg);
  if (s.kind == "fusion") {
    std::vector<std::string> notes;
    const auto lambdas = parse_doubles(s.lambdas, "--lambdas");
    const auto thetas = parse_doubles(s.thetas, "--thetas");
    const ResultTable t = sweep_fusion(g, cfg.experiment, name, lambdas, thetas, &notes);
    for (const auto& n : notes) err << n << '\n';
    emit_table(t, a.out, out);
    if (!t.rows.empty()) {
      // best point in the per-dataset summary layout
      const ResultRow& best = best_by_f1(t);
      std::string summary = "dataset,lambda,theta,gamma,f1\n";
      for (const auto& k : best.keys) summary += k + ',';
      summary += format_double(best.metrics.f1) + '\n';
      if (!a.out.empty()) write_text(prepare_out(a.out) / "best.csv", summary);
    }
  } else if (s.kind == "loss") {
    const auto alphas = s.alphas.empty() ? loss_weight_values() : parse_doubles(s.alphas, "--alphas");
    const auto betas = s.betas.empty() ? loss_weight_values() : parse_doubles(s.betas, "--betas");
    emit_table(sweep_loss_weights(g, cfg.experiment, name, alphas, betas), a.out, out);
  } else {
    throw ConfigError("--kind must be fusion or loss");
  }
  return kExitOk;
}

int cmd_eval(const std::string& pred, const std::string& truth, const std::string& nmi_mode, std::ostream& out) {
  const auto p = read_labels(pred);
  const auto t = read_labels(truth);
  NmiNormalization norm = NmiNormalization::Geometric;
  if (nmi_mode == "arithmetic") norm = NmiNormalization::Arithmetic;
  else if (nmi_mode != "geometric") throw ConfigError("--nmi must be geometric or arithmetic");
  print_metrics(out, evaluate(p, t, norm));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph clustering with fused GCN, attention and contrastive channels", "gclgcn"};
  app.require_subcommand(1);

  SbmArgs sbm;
  auto* gen = app.add_subcommand("gen-sbm", "generate a stochastic block model graph");
  gen->add_option("--blocks", sbm.blocks, "comma-separated block sizes");
  gen->add_option("--p-in", sbm.p_in, "intra-block edge probability");
  gen->add_option("--p-out", sbm.p_out, "inter-block edge probability");
  gen->add_option("--dims", sbm.dims, "feature dimension");
  gen->add_option("--separation", sbm.separation, "distance between block means in noise units");
  gen->add_option("--noise", sbm.noise, "feature noise standard deviation");
  gen->add_option("--seed", sbm.seed, "random seed");
  gen->add_option("--out", sbm.out, "output directory")->required();

  std::string c_features, c_edges, c_measures = "degree,betweenness,closeness", c_out;
  auto* cent = app.add_subcommand("centrality", "dump per-node centralities as CSV");
  cent->add_option("--features", c_features, "features CSV")->required();
  cent->add_option("--edges", c_edges, "edge list")->required();
  cent->add_option("--measures", c_measures, "comma list of degree, betweenness, closeness");
  cent->add_option("--out", c_out, "output CSV (default stdout)");

  ExperimentArgs pre_args, train_args, ablate_args, layer_args, enc_args, sweep_args;
  add_experiment_flags(app.add_subcommand("pretrain", "pretrain the autoencoder and contrastive encoder"), pre_args,
                       true);
  add_experiment_flags(app.add_subcommand("train", "run the joint training loop"), train_args, true);
  add_experiment_flags(app.add_subcommand("ablate", "four-variant ablation table"), ablate_args, false);
  auto* layers = app.add_subcommand("layers", "depth study table");
  add_experiment_flags(layers, layer_args, false);
  std::string depths = "1,2,3,4";
  layers->add_option("--depths", depths, "comma list of depths");
  add_experiment_flags(app.add_subcommand("encodings", "centrality and spatial encoding study"), enc_args, false);
  auto* sweep = app.add_subcommand("sweep", "hyperparameter grid");
  add_experiment_flags(sweep, sweep_args, false);
  SweepArgs sweep_opts;
  sweep->add_option("--kind", sweep_opts.kind, "fusion or loss");
  sweep->add_option("--lambdas", sweep_opts.lambdas, "fusion grid for lambda");
  sweep->add_option("--thetas", sweep_opts.thetas, "fusion grid for theta");
  sweep->add_option("--alphas", sweep_opts.alphas, "loss grid for alpha");
  sweep->add_option("--betas", sweep_opts.betas, "loss grid for beta");

  std::string e_pred, e_truth, e_nmi = "geometric";
  auto* ev = app.add_subcommand("eval", "score predicted labels");
  ev->add_option("--pred", e_pred, "predicted labels")->required();
  ev->add_option("--truth", e_truth, "ground-truth labels")->required();
  ev->add_option("--nmi", e_nmi, "geometric or arithmetic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "gen-sbm") return cmd_gen_sbm(sbm, out);
    if (name == "centrality") return cmd_centrality(c_features, c_edges, c_measures, c_out, out);
    if (name == "pretrain") return cmd_pretrain(pre_args, out);
    if (name == "train") return cmd_train(train_args, out);
    if (name == "ablate") return cmd_ablate(ablate_args, out);
    if (name == "layers") return cmd_layers(layer_args, depths, out);
    if (name == "encodings") return cmd_encodings(enc_args, out);
    if (name == "sweep") return cmd_sweep(sweep_args, sweep_opts, out, err);
    if (name == "eval") return cmd_eval(e_pred, e_truth, e_nmi, out);
    err << "unknown subcommand " << name << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace gclgcn
