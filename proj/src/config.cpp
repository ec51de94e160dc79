// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/config.hpp"

#include "gclgcn/text_io.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace gclgcn {

namespace {

struct PresetRow {
  const char* name;
  std::size_t epochs;
  double alpha, beta;
  std::size_t n_z;
  double lr, lambda, theta, gamma, epsilon;
};

constexpr std::array<PresetRow, 6> kPresets{{
    {"acm", 200, 0.3, 0.3, 10, 5e-5, 0.4, 0.3, 0.3, 0.5},
    {"dblp", 200, 0.08, 0.3, 10, 2e-3, 0.7, 0.1, 0.2, 0.5},
    {"citeseer", 200, 0.3, 0.12, 10, 4e-5, 0.1, 0.8, 0.1, 0.5},
    {"cora", 400, 0.1, 0.1, 10, 1e-4, 0.4, 0.1, 0.5, 0.5},
    {"hhar", 600, 0.15, 0.05, 20, 1e-4, 0.1, 0.8, 0.1, 0.5},
    {"reuters", 200, 0.3, 0.3, 20, 1e-4, 0.4, 0.1, 0.5, 0.5},
}};

const std::array<const char*, 9> kRequiredKeys{"epochs", "alpha", "beta", "n_z", "lr",
                                            "lambda", "theta", "gamma", "epsilon"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string context(std::string_view key) { return "config key '" + std::string(key) + "'"; }

double number(std::string_view key, std::string_view value) { return parse_double(value, context(key)); }

std::size_t count(std::string_view key, std::string_view value) {
  const long long v = parse_integer(value, context(key));
  if (v < 0) throw ConfigError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

bool boolean(std::string_view key, std::string_view value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(value) + "'");
}

std::vector<std::size_t> count_list(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (auto part : split(value, ',')) out.push_back(count(key, trim(part)));
  return out;
}

std::filesystem::path resolve(std::string_view value, const std::filesystem::path& base) {
  std::filesystem::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

std::string join_counts(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

}  // namespace

ExperimentConfig preset_config(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& row : kPresets) {
    if (key == row.name) {
      ExperimentConfig c;
      c.epochs = row.epochs;
      c.alpha = row.alpha;
      c.beta = row.beta;
      c.n_z = row.n_z;
      c.lr = row.lr;
      c.lambda = row.lambda;
      c.theta = row.theta;
      c.gamma = row.gamma;
      c.epsilon = row.epsilon;
      return c;
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& row : kPresets) out.emplace_back(row.name);
  return out;
}

void apply_setting(ConfigFile& cfg, std::string_view key, std::string_view value, const std::filesystem::path& base) {
  ExperimentConfig& e = cfg.experiment;
  if (key == "dataset") cfg.dataset = std::string(value);
  else if (key == "features") cfg.features = resolve(value, base);
  else if (key == "edges") cfg.edges = resolve(value, base);
  else if (key == "labels") cfg.labels = resolve(value, base);
  else if (key == "epochs") e.epochs = count(key, value);
  else if (key == "alpha") e.alpha = number(key, value);
  else if (key == "beta") e.beta = number(key, value);
  else if (key == "n_z") e.n_z = count(key, value);
  else if (key == "lr") e.lr = number(key, value);
  else if (key == "lambda") e.lambda = number(key, value);
  else if (key == "theta") e.theta = number(key, value);
  else if (key == "gamma") e.gamma = number(key, value);
  else if (key == "epsilon") e.epsilon = number(key, value);
  else if (key == "t") e.t = number(key, value);
  else if (key == "k") e.k = count(key, value);
  else if (key == "seed") e.seed = static_cast<std::uint64_t>(count(key, value));
  else if (key == "heads") e.heads = static_cast<int>(count(key, value));
  else if (key == "layers") e.layers = count(key, value);
  else if (key == "hidden") e.hidden = count_list(key, value);
  else if (key == "ae.lr") e.ae_lr = number(key, value);
  else if (key == "ae.epochs") e.ae_epochs = count(key, value);
  else if (key == "contrastive.p") e.contrastive.p = number(key, value);
  else if (key == "contrastive.tau") e.contrastive.tau = number(key, value);
  else if (key == "contrastive.beta_sim") e.contrastive.beta_sim = number(key, value);
  else if (key == "contrastive.hidden") e.contrastive.hidden = count(key, value);
  else if (key == "contrastive.epochs") e.contrastive.epochs = count(key, value);
  else if (key == "contrastive.lr") e.contrastive.lr = number(key, value);
  else if (key == "centrality") {
    e.centrality.clear();
    for (auto part : split(value, ',')) e.centrality.push_back(parse_centrality_measure(trim(part)));
    std::sort(e.centrality.begin(), e.centrality.end());
    e.centrality.erase(std::unique(e.centrality.begin(), e.centrality.end()), e.centrality.end());
  } else if (key == "spatial_mode") e.spatial_mode = parse_spatial_mode(value);
  else if (key == "spatial_sign") {
    if (value == "+" || value == "1" || value == "+1") e.spatial_sign = 1.0;
    else if (value == "-" || value == "-1") e.spatial_sign = -1.0;
    else throw ConfigError("spatial_sign must be + or -");
  } else if (key == "ablation") e.variant = parse_variant(value);
  else if (key == "raw-ax-target") e.raw_ax_target = boolean(key, value);
  else if (key == "centrality_scale") {
    if (value == "none") e.centrality_scale = CentralityScale::None;
    else if (value == "max") e.centrality_scale = CentralityScale::Max;
    else throw ConfigError("centrality_scale must be none or max");
  } else if (key == "centroid_init") {
    if (value == "ae") e.centroid_init = CentroidInit::Ae;
    else if (value == "fused") e.centroid_init = CentroidInit::Fused;
    else throw ConfigError("centroid_init must be ae or fused");
  } else if (key == "nmi") {
    const std::string v = lower(value);
    if (v == "geometric") e.nmi = NmiNormalization::Geometric;
    else if (v == "arithmetic") e.nmi = NmiNormalization::Arithmetic;
    else throw ConfigError("nmi must be geometric or arithmetic");
  } else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

ConfigFile parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
    entries.emplace_back(std::move(key), std::move(value));
  }

  ConfigFile cfg;
  const auto preset = std::find_if(entries.begin(), entries.end(), [](const auto& e) { return e.first == "preset"; });
  if (preset != entries.end()) {
    cfg.experiment = preset_config(preset->second);
    cfg.dataset = lower(preset->second);
  } else {
    for (const char* k : kRequiredKeys) {
      if (!seen.count(k)) throw ConfigError("missing config key '" + std::string(k) + "'");
    }
  }
  for (const auto& [key, value] : entries) {
    if (key != "preset") apply_setting(cfg, key, value, base_dir);
  }
  cfg.experiment.validate();
  return cfg;
}

ConfigFile parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_file(path), path.parent_path());
}

std::string write_config(const ConfigFile& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  if (!cfg.dataset.empty()) put("dataset", cfg.dataset);
  if (cfg.features) put("features", cfg.features->string());
  if (cfg.edges) put("edges", cfg.edges->string());
  if (cfg.labels) put("labels", cfg.labels->string());
  put("epochs", std::to_string(e.epochs));
  put("alpha", format_double(e.alpha));
  put("beta", format_double(e.beta));
  put("n_z", std::to_string(e.n_z));
  put("lr", format_double(e.lr));
  put("lambda", format_double(e.lambda));
  put("theta", format_double(e.theta));
  put("gamma", format_double(e.gamma));
  put("epsilon", format_double(e.epsilon));
  put("t", format_double(e.t));
  put("k", std::to_string(e.k));
  put("seed", std::to_string(e.seed));
  put("heads", std::to_string(e.heads));
  put("layers", std::to_string(e.layers));
  put("hidden", join_counts(e.hidden));
  put("ae.lr", format_double(e.ae_lr));
  put("ae.epochs", std::to_string(e.ae_epochs));
  put("contrastive.p", format_double(e.contrastive.p));
  put("contrastive.tau", format_double(e.contrastive.tau));
  put("contrastive.beta_sim", format_double(e.contrastive.beta_sim));
  put("contrastive.hidden", std::to_string(e.contrastive.hidden));
  put("contrastive.epochs", std::to_string(e.contrastive.epochs));
  put("contrastive.lr", format_double(e.contrastive.lr));
  std::string measures;
  for (std::size_t i = 0; i < e.centrality.size(); ++i) {
    measures += (i ? "," : "") + std::string(to_string(e.centrality[i]));
  }
  put("centrality", measures);
  put("spatial_mode", std::string(to_string(e.spatial_mode)));
  put("spatial_sign", e.spatial_sign > 0 ? "+" : "-");
  put("ablation", std::string(to_string(e.variant)));
  put("raw-ax-target", e.raw_ax_target ? "true" : "false");
  put("centrality_scale", e.centrality_scale == CentralityScale::Max ? "max" : "none");
  put("centroid_init", e.centroid_init == CentroidInit::Fused ? "fused" : "ae");
  put("nmi", e.nmi == NmiNormalization::Geometric ? "geometric" : "arithmetic");
  return out.str();
}

}  // namespace gclgcn
