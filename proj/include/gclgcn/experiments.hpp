// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/training.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gclgcn {

struct ResultRow {
  std::vector<std::string> keys;
  MetricRow metrics;
};

/// CSV with the key columns first, then acc,nmi,ari,f1,composite.
struct ResultTable {
  std::vector<std::string> key_columns;
  std::vector<ResultRow> rows;

  void write_csv(std::ostream& out) const;
  std::string csv() const;
};

/// First row with the largest F1. Throws ContractError on an empty table.
const ResultRow& best_by_f1(const ResultTable& table);

/// norm, -GCN, -Graphormer, -ContrastiveLearning.
ResultTable ablation_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset);

/// One run per (lambda, theta) with gamma = 1 - lambda - theta. Infeasible
/// points are skipped and described in `notes`.
ResultTable sweep_fusion(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                         std::span<const double> lambdas, std::span<const double> thetas,
                         std::vector<std::string>* notes = nullptr);

/// {0.01, 0.05, 0.08, 0.1, 0.12, 0.15, 0.3}
std::vector<double> loss_weight_values();

/// Full alpha x beta cross product.
ResultTable sweep_loss_weights(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                               std::span<const double> alphas, std::span<const double> betas);

/// Rows "GCL-GCN-x" for each requested depth.
ResultTable layer_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset,
                        std::span<const std::size_t> depths);

struct EncodingVariant {
  std::string label;
  std::vector<CentralityMeasure> centrality;
  SpatialMode spatial;
};

/// "GCL-GCN", "DC, BC and CC + SPD", "DC + ED", "BC + ED", "CC + ED".
std::vector<EncodingVariant> encoding_variants();

ResultTable encoding_study(const Graph& g, const ExperimentConfig& cfg, const std::string& dataset);

}  // namespace gclgcn
