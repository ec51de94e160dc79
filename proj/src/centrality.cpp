// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/centrality.hpp"

#include <algorithm>
#include <cmath>

namespace gclgcn {

std::string_view to_string(CentralityMeasure m) {
  switch (m) {
    case CentralityMeasure::Degree: return "degree";
    case CentralityMeasure::Betweenness: return "betweenness";
    case CentralityMeasure::Closeness: return "closeness";
  }
  return "?";
}

CentralityMeasure parse_centrality_measure(std::string_view name) {
  if (name == "degree" || name == "dc" || name == "DC") return CentralityMeasure::Degree;
  if (name == "betweenness" || name == "bc" || name == "BC") return CentralityMeasure::Betweenness;
  if (name == "closeness" || name == "cc" || name == "CC") return CentralityMeasure::Closeness;
  throw ConfigError("unknown centrality measure '" + std::string(name) + "'");
}

Vector degree_centrality(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Vector deg(n);
  for (Eigen::Index i = 0; i < n; ++i) deg[i] = static_cast<double>(g.degree(i));
  const double max_deg = n > 0 ? deg.maxCoeff() : 0.0;
  if (max_deg == 0.0) return Vector::Zero(n);
  return deg / max_deg;
}

Vector betweenness_centrality(const Graph& g) {
  const std::size_t n = g.n();
  Vector total = Vector::Zero(static_cast<Eigen::Index>(n));

  std::vector<std::size_t> order;  // BFS visitation order (stack S)
  std::vector<long> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  order.reserve(n);

  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const std::size_t v = order[head];
      for (std::size_t w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    // Predecessors of w are exactly neighbors at distance dist[w]-1.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t w = *it;
      for (std::size_t v : g.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) total[static_cast<Eigen::Index>(w)] += delta[w];
    }
  }
  // every unordered pair was counted from both endpoints
  return total * 0.5;
}

Vector closeness_centrality(const Graph& g) {
  const HopMatrix hops = shortest_path_hops(g);
  const std::size_t n = g.n();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t sum = 0;
    for (std::size_t u = 0; u < n; ++u) {
      const std::size_t d = hops(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u));
      if (u != v && d < n) sum += d;
    }
    if (sum > 0) out[static_cast<Eigen::Index>(v)] = 1.0 / static_cast<double>(sum);
  }
  return out;
}

CentralityMatrix composite_centrality(const Graph& g, std::vector<CentralityMeasure> measures) {
  if (measures.empty()) throw ConfigError("composite_centrality: measure set must be nonempty");
  std::sort(measures.begin(), measures.end());
  measures.erase(std::unique(measures.begin(), measures.end()), measures.end());

  CentralityMatrix out;
  out.measures = measures;
  out.values.resize(static_cast<Eigen::Index>(g.n()), static_cast<Eigen::Index>(measures.size()));
  for (std::size_t c = 0; c < measures.size(); ++c) {
    Vector col;
    switch (measures[c]) {
      case CentralityMeasure::Degree: col = degree_centrality(g); break;
      case CentralityMeasure::Betweenness: col = betweenness_centrality(g); break;
      case CentralityMeasure::Closeness: col = closeness_centrality(g); break;
    }
    out.values.col(static_cast<Eigen::Index>(c)) = col;
  }
  return out;
}

std::string_view to_string(SpatialMode m) {
  return m == SpatialMode::Euclidean ? "euclidean" : "shortest-path";
}

SpatialMode parse_spatial_mode(std::string_view name) {
  if (name == "euclidean" || name == "ed" || name == "ED") return SpatialMode::Euclidean;
  if (name == "shortest-path" || name == "spd" || name == "SPD") return SpatialMode::ShortestPath;
  throw ConfigError("unknown spatial mode '" + std::string(name) + "'");
}

bool SpatialBias::contains(std::size_t i, std::size_t j) const {
  if (i >= entries.size()) return false;
  const auto& row = entries[i];
  auto it = std::lower_bound(row.begin(), row.end(), j,
                             [](const auto& e, std::size_t key) { return e.first < key; });
  return it != row.end() && it->first == j;
}

double SpatialBias::at(std::size_t i, std::size_t j) const {
  if (i < entries.size()) {
    const auto& row = entries[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& e, std::size_t key) { return e.first < key; });
    if (it != row.end() && it->first == j) return it->second;
  }
  throw ContractError("spatial bias missing for pair (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
}

SpatialBias spatial_bias(const Graph& g, SpatialMode mode) {
  SpatialBias out;
  out.mode = mode;
  out.entries.resize(g.n());
  const Matrix& x = g.features();
  for (std::size_t i = 0; i < g.n(); ++i) {
    auto& row = out.entries[i];
    row.reserve(g.degree(i) + 1);
    bool self_done = false;
    auto push_self = [&] {
      row.emplace_back(i, 0.0);
      self_done = true;
    };
    for (std::size_t j : g.neighbors(i)) {
      if (!self_done && j > i) push_self();
      double d = 1.0;
      if (mode == SpatialMode::Euclidean) {
        d = (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm();
      }
      row.emplace_back(j, d);
    }
    if (!self_done) push_self();
  }
  return out;
}

}  // namespace gclgcn
