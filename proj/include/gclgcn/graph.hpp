// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace gclgcn {

/// Undirected edge stored with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable attributed graph.
///
/// Edges are canonicalized on construction (u < v, sorted, deduplicated).
/// Self-loops and out-of-range endpoints are rejected.
class Graph {
 public:
  Graph(Matrix features, std::vector<Edge> edges,
        std::optional<std::vector<int>> labels = std::nullopt,
        std::optional<int> num_classes = std::nullopt);

  std::size_t n() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t f() const { return static_cast<std::size_t>(features_.cols()); }
  const Matrix& features() const { return features_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  std::optional<int> num_classes() const { return num_classes_; }

  /// Sorted neighbor list of node i (excluding i).
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }

  /// Same topology and labels, different node features.
  Graph with_features(Matrix features) const;

 private:
  Matrix features_;
  std::vector<Edge> edges_;
  std::optional<std::vector<int>> labels_;
  std::optional<int> num_classes_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

Graph load_graph(const std::filesystem::path& features_path, const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& labels_path = std::nullopt);

/// Writes features.csv, edges.txt and (when present) labels.txt into `dir`.
void save_graph(const Graph& g, const std::filesystem::path& dir);
void write_edges(const std::filesystem::path& path, const std::vector<Edge>& edges);

struct NormalizedAdjacency {
  Matrix matrix;   // D^{-1/2}(A+I)D^{-1/2}
  Vector degree;   // 1 + deg(i)
};

NormalizedAdjacency normalize_adjacency(const Graph& g);

/// 0/1 adjacency without self-loops.
Matrix binary_adjacency(const Graph& g);

using HopMatrix = Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// All-pairs BFS hop counts. Unreachable pairs hold n.
HopMatrix shortest_path_hops(const Graph& g);

struct SbmSpec {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.0;
  double p_out = 0.0;
  Matrix block_means;  // k x f
  double noise_std = 0.0;

  void validate() const;
};

/// Planted-partition graph; node i belongs to the block whose range contains i.
Graph generate_sbm(const SbmSpec& spec, std::uint64_t seed);

/// Block means spaced so every pair of means is `separation` apart.
Matrix separated_block_means(std::size_t k, std::size_t f, double separation);

}  // namespace gclgcn
