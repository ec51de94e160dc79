// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/graph.hpp"

#include "gclgcn/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>

namespace gclgcn {

Graph::Graph(Matrix features, std::vector<Edge> edges, std::optional<std::vector<int>> labels,
             std::optional<int> num_classes)
    : features_(std::move(features)), labels_(std::move(labels)), num_classes_(num_classes) {
  const std::size_t nodes = n();
  for (auto& e : edges) {
    if (e.u == e.v) throw ContractError("self-loop rejected at node " + std::to_string(e.u));
    if (e.u >= nodes || e.v >= nodes) {
      throw RangeError("edge endpoint out of range: (" + std::to_string(e.u) + "," +
                       std::to_string(e.v) + ") with n=" + std::to_string(nodes));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  if (labels_) {
    if (labels_->size() != nodes) {
      throw MismatchError("label count " + std::to_string(labels_->size()) +
                          " does not match node count " + std::to_string(nodes));
    }
    int max_label = -1;
    for (int l : *labels_) {
      if (l < 0) throw RangeError("negative label");
      max_label = std::max(max_label, l);
    }
    if (!num_classes_) num_classes_ = max_label + 1;
    if (max_label >= *num_classes_) throw RangeError("label outside [0, k)");
  }

  adjacency_.assign(nodes, {});
  for (const auto& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

Graph Graph::with_features(Matrix features) const {
  if (static_cast<std::size_t>(features.rows()) != n()) {
    throw DimensionError("with_features: row count mismatch");
  }
  return Graph(std::move(features), edges_, labels_, num_classes_);
}

Graph load_graph(const std::filesystem::path& features_path, const std::filesystem::path& edges_path,
                 const std::optional<std::filesystem::path>& labels_path) {
  Matrix features = read_matrix_csv(features_path);
  const auto n = static_cast<std::size_t>(features.rows());

  std::vector<Edge> edges;
  const std::string text = read_file(edges_path);
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string ctx = edges_path.filename().string() + " line " + std::to_string(line_no);
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      const auto end = std::min(line.find_first_of(" \t", start), line.size());
      tokens.push_back(line.substr(start, end - start));
      pos = end;
    }
    if (tokens.size() != 2) throw ParseError("expected two endpoints at " + ctx);
    const auto u = parse_integer(tokens[0], ctx);
    const auto v = parse_integer(tokens[1], ctx);
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      throw RangeError("edge endpoint out of range at " + ctx + " (n=" + std::to_string(n) + ")");
    }
    if (u == v) throw ContractError("self-loop rejected at line " + std::to_string(line_no));
    edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
  }

  std::optional<std::vector<int>> labels;
  if (labels_path) {
    labels = read_labels(*labels_path);
    if (labels->size() != n) {
      throw MismatchError("feature row count " + std::to_string(n) + " != label count " +
                          std::to_string(labels->size()));
    }
  }
  return Graph(std::move(features), std::move(edges), std::move(labels));
}

void write_edges(const std::filesystem::path& path, const std::vector<Edge>& edges) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& e : edges) out << e.u << ' ' << e.v << '\n';
}

void save_graph(const Graph& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "features.csv", g.features());
  write_edges(dir / "edges.txt", g.edges());
  if (g.labels()) write_labels(dir / "labels.txt", *g.labels());
}

NormalizedAdjacency normalize_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  NormalizedAdjacency out;
  out.degree.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.degree[i] = 1.0 + static_cast<double>(g.degree(i));
  out.matrix = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) out.matrix(i, i) = 1.0 / out.degree[i];
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    const double w = 1.0 / std::sqrt(out.degree[u] * out.degree[v]);
    out.matrix(u, v) = w;
    out.matrix(v, u) = w;
  }
  return out;
}

Matrix binary_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.n());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = 1.0;
    a(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = 1.0;
  }
  return a;
}

HopMatrix shortest_path_hops(const Graph& g) {
  const std::size_t n = g.n();
  HopMatrix hops = HopMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), n);
  std::vector<std::size_t> queue;
  queue.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    auto row = hops.row(static_cast<Eigen::Index>(s));
    row[static_cast<Eigen::Index>(s)] = 0;
    queue.clear();
    queue.push_back(s);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      const std::size_t next = row[static_cast<Eigen::Index>(v)] + 1;
      for (std::size_t w : g.neighbors(v)) {
        if (row[static_cast<Eigen::Index>(w)] == n) {
          row[static_cast<Eigen::Index>(w)] = next;
          queue.push_back(w);
        }
      }
    }
  }
  return hops;
}

void SbmSpec::validate() const {
  if (block_sizes.empty()) throw ConfigError("sbm: at least one block required");
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
    throw ConfigError("sbm: probabilities must lie in [0,1]");
  }
  if (noise_std < 0.0) throw ConfigError("sbm: noise std must be >= 0");
  if (static_cast<std::size_t>(block_means.rows()) != block_sizes.size()) {
    throw ConfigError("sbm: need one mean row per block");
  }
}

Graph generate_sbm(const SbmSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::vector<int> labels;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    labels.insert(labels.end(), spec.block_sizes[b], static_cast<int>(b));
  }
  const std::size_t n = labels.size();
  const auto f = spec.block_means.cols();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? spec.p_in : spec.p_out;
      // draw unconditionally so the stream does not depend on p
      if (unit(rng) < p) edges.push_back({u, v});
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix features(static_cast<Eigen::Index>(n), f);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) {
      features(static_cast<Eigen::Index>(i), j) =
          spec.block_means(labels[i], j) + spec.noise_std * noise(rng);
    }
  }
  const int k = static_cast<int>(spec.block_sizes.size());
  return Graph(std::move(features), std::move(edges), std::move(labels), k);
}

Matrix separated_block_means(std::size_t k, std::size_t f, double separation) {
  if (f < k) throw ConfigError("separated_block_means: need f >= k");
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
  const double scale = separation / std::sqrt(2.0);
  for (std::size_t b = 0; b < k; ++b) means(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b)) = scale;
  return means;
}

}  // namespace gclgcn
