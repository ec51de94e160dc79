// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <array>
#include <map>

namespace gclgcn {

namespace {

void check_lengths(std::span<const int> pred, std::span<const int> truth, const char* op) {
  if (pred.size() != truth.size()) {
    throw MismatchError(std::string(op) + ": length mismatch " + std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()));
  }
}

/// Dense re-indexing of arbitrary labels, preserving numeric order.
struct Encoded {
  std::vector<int> ids;
  std::vector<int> values;  // id -> original label
};

Encoded encode(std::span<const int> labels) {
  std::map<int, int> index;
  for (int l : labels) index.emplace(l, 0);
  Encoded e;
  for (auto& [label, id] : index) {
    id = static_cast<int>(e.values.size());
    e.values.push_back(label);
  }
  e.ids.reserve(labels.size());
  for (int l : labels) e.ids.push_back(index[l]);
  return e;
}

Matrix contingency(const Encoded& a, const Encoded& b) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(a.values.size()), static_cast<Eigen::Index>(b.values.size()));
  for (std::size_t i = 0; i < a.ids.size(); ++i) m(a.ids[i], b.ids[i]) += 1.0;
  return m;
}

double comb2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

std::vector<int> hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw DimensionError("hungarian: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // potentials u (rows), v (cols); p[j] = row matched to column j (1-based)
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  }
  return row_to_col;
}

std::vector<int> best_label_mapping(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "best_label_mapping");
  const Encoded ep = encode(pred);
  const Encoded et = encode(truth);
  const Eigen::Index size = static_cast<Eigen::Index>(std::max(ep.values.size(), et.values.size()));
  Matrix counts = Matrix::Zero(size, size);
  counts.topLeftCorner(static_cast<Eigen::Index>(ep.values.size()), static_cast<Eigen::Index>(et.values.size())) =
      contingency(ep, et);
  // Among matchings with the most hits, prefer the one with the largest summed
  // per-class F1 so the result does not depend on how predicted ids are numbered.
  Matrix score = counts;
  const RowVector truth_sizes = counts.colwise().sum();
  const Vector pred_sizes = counts.rowwise().sum();
  const double w = 1.0 / static_cast<double>(size + 1);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      const double denom = pred_sizes(i) + truth_sizes(j);
      if (denom > 0) score(i, j) += w * 2.0 * counts(i, j) / denom;
    }
  }
  const double top = score.size() ? score.maxCoeff() : 0.0;
  const std::vector<int> assignment = hungarian((Matrix::Constant(size, size, top) - score).eval());

  // Truth ids beyond the observed labels map to fresh labels above max(truth).
  int fresh = et.values.empty() ? 0 : et.values.back() + 1;
  const int max_pred = ep.values.empty() ? -1 : ep.values.back();
  std::vector<int> mapping(static_cast<std::size_t>(max_pred + 1), -1);
  for (std::size_t id = 0; id < ep.values.size(); ++id) {
    const int t = assignment[id];
    mapping[static_cast<std::size_t>(ep.values[id])] =
        t < static_cast<int>(et.values.size()) ? et.values[static_cast<std::size_t>(t)] : fresh++;
  }
  return mapping;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "accuracy");
  if (pred.empty()) return 0.0;
  const std::vector<int> mapping = best_label_mapping(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mapping[static_cast<std::size_t>(pred[i])] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth, NmiNormalization norm) {
  check_lengths(pred, truth, "nmi");
  if (pred.empty()) return 0.0;
  const Encoded ep = encode(pred);
  const Encoded et = encode(truth);
  const Matrix c = contingency(ep, et);
  const double n = static_cast<double>(pred.size());
  const Vector rows = c.rowwise().sum();
  const Vector cols = c.colwise().sum().transpose();

  auto entropy = [n](const Vector& counts) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < counts.size(); ++i) {
      if (counts[i] > 0) h -= counts[i] / n * std::log(counts[i] / n);
    }
    return h;
  };
  const double hp = entropy(rows);
  const double ht = entropy(cols);
  if (hp == 0.0 || ht == 0.0) return (hp == 0.0 && ht == 0.0) ? 1.0 : 0.0;

  double mi = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (c(i, j) > 0) mi += c(i, j) / n * std::log(c(i, j) * n / (rows[i] * cols[j]));
    }
  }
  const double denom = norm == NmiNormalization::Geometric ? std::sqrt(hp * ht) : 0.5 * (hp + ht);
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "ari");
  const double n = static_cast<double>(pred.size());
  if (n < 2) return 1.0;
  const Encoded ep = encode(pred);
  const Encoded et = encode(truth);
  const Matrix c = contingency(ep, et);
  double index = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) index += comb2(c.data()[i]);
  double sum_a = 0.0;
  double sum_b = 0.0;
  const Vector rows = c.rowwise().sum();
  const Vector cols = c.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < rows.size(); ++i) sum_a += comb2(rows[i]);
  for (Eigen::Index j = 0; j < cols.size(); ++j) sum_b += comb2(cols[j]);
  const double expected = sum_a * sum_b / comb2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  // both partitions trivial in the same way (all-one-cluster or all-singletons)
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double f1_macro(std::span<const int> pred, std::span<const int> truth) {
  check_lengths(pred, truth, "f1_macro");
  if (pred.empty()) return 0.0;
  const std::vector<int> mapping = best_label_mapping(pred, truth);
  std::vector<int> mapped(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) mapped[i] = mapping[static_cast<std::size_t>(pred[i])];

  std::map<int, std::array<double, 3>> stats;  // label -> {tp, predicted, actual}
  for (std::size_t i = 0; i < pred.size(); ++i) {
    stats[mapped[i]][1] += 1.0;
    stats[truth[i]][2] += 1.0;
    if (mapped[i] == truth[i]) stats[truth[i]][0] += 1.0;
  }
  double total = 0.0;
  for (const auto& [label, s] : stats) {
    const double denom = s[1] + s[2];
    total += denom > 0 ? 2.0 * s[0] / denom : 0.0;
  }
  return total / static_cast<double>(stats.size());
}

MetricRow evaluate(std::span<const int> pred, std::span<const int> truth, NmiNormalization norm) {
  return {accuracy(pred, truth), nmi(pred, truth, norm), ari(pred, truth), f1_macro(pred, truth)};
}

}  // namespace gclgcn
