// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/graph.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace gclgcn {

enum class CentralityMeasure { Degree, Betweenness, Closeness };

std::string_view to_string(CentralityMeasure m);
CentralityMeasure parse_centrality_measure(std::string_view name);

/// C_D(v) = deg(v) / max_u deg(u); all zeros on an edgeless graph.
Vector degree_centrality(const Graph& g);

/// Unnormalized betweenness over unordered pairs (Brandes accumulation).
Vector betweenness_centrality(const Graph& g);

/// 1 / (sum of hop distances to reachable nodes); 0 for isolated nodes.
Vector closeness_centrality(const Graph& g);

/// Per-node centrality vectors. Columns follow (degree, betweenness,
/// closeness) order restricted to the enabled measures.
struct CentralityMatrix {
  Matrix values;
  std::vector<CentralityMeasure> measures;
};

CentralityMatrix composite_centrality(const Graph& g, std::vector<CentralityMeasure> measures);

enum class SpatialMode { Euclidean, ShortestPath };

std::string_view to_string(SpatialMode m);
SpatialMode parse_spatial_mode(std::string_view name);

/// Sparse per-pair attention bias over N(i) ∪ {i}.
///
/// entries[i] holds (j, d(i,j)) for every neighbor j and for j = i,
/// sorted by j.
struct SpatialBias {
  SpatialMode mode = SpatialMode::Euclidean;
  std::vector<std::vector<std::pair<std::size_t, double>>> entries;

  /// Throws ContractError when (i, j) is not stored.
  double at(std::size_t i, std::size_t j) const;
  bool contains(std::size_t i, std::size_t j) const;
};

SpatialBias spatial_bias(const Graph& g, SpatialMode mode);

}  // namespace gclgcn
