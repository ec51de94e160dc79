// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/experiments.hpp"

#include "gclgcn/text_io.hpp"

#include <ostream>
#include <sstream>

namespace gclgcn {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

const std::vector<int>& require_labels(const Graph& g) {
  if (!g.labels()) throw ContractError("experiment tables need ground-truth labels");
  return *g.labels();
}

MetricRow score(const PreparedGraph& data, const ExperimentConfig& cfg, const Pretrained& pre,
                const std::vector<int>& truth) {
  const TrainResult r = train(data, cfg, pre);
  return evaluate(r.labels, truth, cfg.nmi);
}

}  // namespace

void ResultTable::write_csv(std::ostream& out) const {
  for (const auto& k : key_columns) out << csv_field(k) << ',';
  out << "acc,nmi,ari,f1,composite\n";
  for (const auto& row : rows) {
    for (const auto& k : row.keys) out << csv_field(k) << ',';
    const MetricRow& m = row.metrics;
    out << format_double(m.acc) << ',' << format_double(m.nmi) << ',' << format_double(m.ari) << ','
        << format_double(m.f1) << ',' << format_double(m.composite()) << '\n';
  }
}

std::string ResultTable::csv() const {
  std::ostringstream s;
  write_csv(s);
  return s.str();
}

const ResultRow& best_by_f1(const ResultTable& table) {
  if (table.rows.empty()) throw ContractError("best_by_f1: empty table");
  const ResultRow* best = &table.rows.front();
  for (const auto& row : table.rows) {
    if (row.metrics.f1 > best->metrics.f1) best = &row;
  }
  return *best;
}

ResultTable ablation_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset) {
  const auto& truth = require_labels(g);
  ExperimentConfig base = cfg;
  base.variant = Variant::Full;
  const PreparedGraph data = prepare(g, base);
  const Pretrained pre = pretrain(data, base);
  ResultTable t{{"dataset", "variant"}, {}};
  for (Variant v : {Variant::Full, Variant::NoGcn, Variant::NoGraphormer, Variant::NoContrastive}) {
    ExperimentConfig c = base;
    c.variant = v;
    t.rows.push_back({{dataset, std::string(to_string(v))}, score(data, c, pre, truth)});
  }
  return t;
}

ResultTable sweep_fusion(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                         std::span<const double> lambdas, std::span<const double> thetas,
                         std::vector<std::string>* notes) {
  const auto& truth = require_labels(g);
  const PreparedGraph data = prepare(g, cfg);
  const Pretrained pre = pretrain(data, cfg);
  ResultTable t{{"dataset", "lambda", "theta", "gamma"}, {}};
  for (double lambda : lambdas) {
    for (double theta : thetas) {
      double gamma = 1.0 - lambda - theta;
      if (lambda < 0 || theta < 0 || gamma < -1e-12) {
        if (notes) {
          notes->push_back("skipped infeasible point lambda=" + format_double(lambda) +
                           " theta=" + format_double(theta));
        }
        continue;
      }
      gamma = std::max(gamma, 0.0);
      ExperimentConfig c = cfg;
      c.lambda = lambda;
      c.theta = theta;
      c.gamma = gamma;
      try {
        c.validate();
      } catch (const ConfigError& e) {
        if (notes) {
          notes->push_back("skipped lambda=" + format_double(lambda) + " theta=" + format_double(theta) + ": " +
                           e.what());
        }
        continue;
      }
      t.rows.push_back(
          {{dataset, format_double(lambda), format_double(theta), format_double(gamma)}, score(data, c, pre, truth)});
    }
  }
  return t;
}

std::vector<double> loss_weight_values() { return {0.01, 0.05, 0.08, 0.1, 0.12, 0.15, 0.3}; }

ResultTable sweep_loss_weights(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                               std::span<const double> alphas, std::span<const double> betas) {
  const auto& truth = require_labels(g);
  if (alphas.empty() || betas.empty()) throw ConfigError("loss-weight sweep needs nonempty value lists");
  const PreparedGraph data = prepare(g, cfg);
  const Pretrained pre = pretrain(data, cfg);
  ResultTable t{{"dataset", "alpha", "beta"}, {}};
  for (double alpha : alphas) {
    for (double beta : betas) {
      ExperimentConfig c = cfg;
      c.alpha = alpha;
      c.beta = beta;
      t.rows.push_back({{dataset, format_double(alpha), format_double(beta)}, score(data, c, pre, truth)});
    }
  }
  return t;
}

ResultTable layer_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                        std::span<const std::size_t> depths) {
  const auto& truth = require_labels(g);
  ResultTable t{{"dataset", "model"}, {}};
  for (std::size_t depth : depths) {
    ExperimentConfig c = cfg;
    c.layers = depth;
    c.validate();
    const PreparedGraph data = prepare(g, c);
    const Pretrained pre = pretrain(data, c);
    t.rows.push_back({{dataset, "GCL-GCN-" + std::to_string(depth)}, score(data, c, pre, truth)});
  }
  return t;
}

std::vector<EncodingVariant> encoding_variants() {
  using enum CentralityMeasure;
  return {
      {"GCL-GCN", {Degree, Betweenness, Closeness}, SpatialMode::Euclidean},
      {"DC, BC and CC + SPD", {Degree, Betweenness, Closeness}, SpatialMode::ShortestPath},
      {"DC + ED", {Degree}, SpatialMode::Euclidean},
      {"BC + ED", {Betweenness}, SpatialMode::Euclidean},
      {"CC + ED", {Closeness}, SpatialMode::Euclidean},
  };
}

ResultTable encoding_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset) {
  const auto& truth = require_labels(g);
  // pretraining never looks at the encodings, so one run serves every variant
  const Pretrained pre = pretrain(prepare(g, cfg), cfg);
  ResultTable t{{"dataset", "variant"}, {}};
  for (const auto& v : encoding_variants()) {
    ExperimentConfig c = cfg;
    c.centrality = v.centrality;
    c.spatial_mode = v.spatial;
    const PreparedGraph data = prepare(g, c);
    t.rows.push_back({{dataset, v.label}, score(data, c, pre, truth)});
  }
  return t;
}

}  // namespace gclgcn
