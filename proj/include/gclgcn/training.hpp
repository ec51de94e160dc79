// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/centrality.hpp"
#include "gclgcn/cluster.hpp"
#include "gclgcn/graph.hpp"
#include "gclgcn/layers.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gclgcn {

enum class Variant { Full, NoGcn, NoGraphormer, NoContrastive };

/// "norm", "-GCN", "-Graphormer", "-ContrastiveLearning".
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// How the attention layers see the centrality columns: as computed, or
/// divided by each column's maximum.
enum class CentralityScale { None, Max };

/// Where the initial kmeans runs: the pretrained AE bottleneck or the fused
/// embedding Z_L of the freshly initialized model.
enum class CentroidInit { Ae, Fused };

struct ContrastiveConfig {
  double p = 0.2;
  double tau = 0.5;
  double beta_sim = 1.0;
  std::size_t hidden = 256;
  std::size_t epochs = 50;
  double lr = 1e-3;

  bool operator==(const ContrastiveConfig&) const = default;
};

struct ExperimentConfig {
  std::size_t epochs = 200;
  double alpha = 0.1;
  double beta = 0.1;
  std::size_t n_z = 10;
  double lr = 1e-4;
  double lambda = 0.4;
  double theta = 0.1;
  double gamma = 0.5;
  double epsilon = 0.5;
  double t = 1.0;
  std::size_t k = 0;  // 0: number of label classes of the graph
  std::uint64_t seed = 0;
  int heads = 1;
  std::size_t layers = 4;
  std::vector<std::size_t> hidden{500, 500, 2000};
  std::size_t ae_epochs = 50;
  double ae_lr = 1e-3;
  ContrastiveConfig contrastive;
  std::vector<CentralityMeasure> centrality{CentralityMeasure::Degree, CentralityMeasure::Betweenness,
                                            CentralityMeasure::Closeness};
  SpatialMode spatial_mode = SpatialMode::Euclidean;
  double spatial_sign = 1.0;
  Variant variant = Variant::Full;
  bool raw_ax_target = false;
  CentralityScale centrality_scale = CentralityScale::None;
  CentroidInit centroid_init = CentroidInit::Ae;
  NmiNormalization nmi = NmiNormalization::Geometric;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Encoder widths {f, ..., n_z} for the configured depth. With hidden
/// {h1, h2, h3}: depth 1 -> {}, 2 -> {h1}, 3 -> {h1, h3}, 4 -> {h1, h2, h3}.
Ladder encoder_ladder(std::size_t features, const ExperimentConfig& cfg);

/// Fusion weights (lambda, theta, gamma) after dropping the channel removed
/// by the variant and renormalizing the rest to sum 1.
struct FusionWeights {
  double lambda, theta, gamma;
};
FusionWeights effective_fusion(const ExperimentConfig& cfg);

/// Graph-derived constants shared by every epoch.
struct PreparedGraph {
  Matrix x;
  Matrix a_norm;
  Matrix adjacency;  // binary, no self-loops
  Matrix ax;         // a_norm * x
  Matrix ax_raw;     // adjacency * x
  Matrix centrality;
  AttentionStructure attention;
  std::optional<std::vector<int>> labels;
  std::size_t k = 0;
};

PreparedGraph prepare(const Graph& g, const ExperimentConfig& cfg);

/// Derived stream seeds so independent phases draw from independent generators.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

/// Throws NumericError when any loss in `losses` is non-finite.
AEParams pretrain_ae(const PreparedGraph& data, const ExperimentConfig& cfg,
                     std::vector<double>* losses = nullptr);

/// Trains the contrastive encoder and returns X_c = enc(X).
Matrix pretrain_contrastive(const PreparedGraph& data, const ExperimentConfig& cfg,
                            std::vector<double>* losses = nullptr);

/// Pretraining output; depends only on the seed, ladder and pretraining settings.
struct Pretrained {
  AEParams ae;
  Matrix x_c;
  std::vector<double> ae_losses;
  std::vector<double> contrastive_losses;
};

/// Skips contrastive pretraining (X_c = 0) for the -ContrastiveLearning variant.
Pretrained pretrain(const PreparedGraph& data, const ExperimentConfig& cfg);

struct ModelState {
  AEParams ae;
  GcnParams gcn;
  GraphormerParams graphormer;
  Parameter centroids;  // k x n_z
  Parameter x_c;        // n x f, frozen

  /// Parameters updated by the joint loop for the given variant.
  std::vector<Parameter*> trainable(Variant v);
  /// Everything persisted in a checkpoint, in a stable order.
  std::vector<Parameter*> tensors();
};

/// Builds the joint model from pretrained artifacts; centroids come from
/// kmeans on the embedding selected by cfg.centroid_init.
ModelState init_model(const PreparedGraph& data, const ExperimentConfig& cfg, const Pretrained& pre,
                      std::vector<int>* kmeans_labels = nullptr);

/// eps * h_ae + (1 - eps) * z_prev.
Var fused_input(const Var& h_ae, const Var& z_prev, double eps);
/// a_norm (lambda z_gcn + theta z_ae + gamma z_t). A null channel is skipped.
Var fuse_final(const Var* z_gcn, const Var& z_ae, const Var* z_t, const Var& a_norm, FusionWeights w);

/// Student-t kernel against the centroids, row-normalized.
Var soft_assign(const Var& z, const Var& centroids, double t);
Matrix target_distribution(const Matrix& q);
/// sum num * log(num / den) with both floored at 1e-12.
Var kl_div(const Var& num, const Var& den);

/// Closed-form gradient of kl(P, Q) with respect to the centroids.
Matrix centroid_gradient(const Matrix& z, const Matrix& centroids, const Matrix& p, const Matrix& q, double t);

/// Ties go to the smallest column.
std::vector<int> assign_labels(const Matrix& q);

struct LossParts {
  double total = 0, ae = 0, w = 0, a1 = 0, a2 = 0, clu = 0, con = 0;
};

struct Forward {
  AeForward ae;
  std::vector<Var> gcn_hidden;
  Var gcn_reconstruction;
  std::vector<Var> t_hidden;
  Var t_reconstruction;
  Var z_l;
  Var q;
  Var q_prime;
};

Forward forward(Tape& tape, ModelState& state, const PreparedGraph& data, const ExperimentConfig& cfg);

struct CompositeLoss {
  Var total;
  Var ae, w, a1, a2, clu, con;  // a1 / a2 unset when the channel is ablated
  LossParts values() const;
};

/// Full objective for a given (detached) target distribution p.
CompositeLoss loss_total(const Forward& fwd, const PreparedGraph& data, const ExperimentConfig& cfg,
                         const Matrix& p);

struct EpochRecord {
  std::size_t epoch = 0;
  LossParts loss;
  std::optional<MetricRow> metrics;
};

struct EpochObservation {
  std::size_t epoch;
  const Matrix& z_l;
  const Matrix& z_ae;
  const Matrix& q;
  const Matrix& q_prime;
  const Matrix& p;
  const Matrix& centroids;
  const Matrix& centroid_grad;  // tape gradient of the clustering term alone
  const LossParts& loss;
};

struct TrainOptions {
  std::function<void(const EpochObservation&)> on_epoch;
  /// Written with the last finite parameters when the loss turns non-finite.
  std::filesystem::path failure_checkpoint;
};

struct TrainResult {
  ModelState state;
  std::vector<EpochRecord> history;
  std::vector<int> labels;
  std::vector<int> initial_labels;  // kmeans labels used for the centroids
  Matrix q;
};

/// Runs the joint loop. Pretraining is computed when `pre` is null.
TrainResult train(const Graph& g, const ExperimentConfig& cfg, const Pretrained* pre = nullptr,
                  const TrainOptions& options = {});
TrainResult train(const PreparedGraph& data, const ExperimentConfig& cfg, const Pretrained& pre,
                  const TrainOptions& options = {});

/// Trains `variant` and scores it against the graph labels.
MetricRow ablate(const Graph& g, ExperimentConfig cfg, Variant variant);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

}  // namespace gclgcn
