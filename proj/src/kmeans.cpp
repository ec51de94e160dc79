// SPDX-License-Identifier: Apache-2.0
#include "gclgcn/cluster.hpp"

#include <limits>
#include <random>

namespace gclgcn {

namespace {

struct Assignment {
  std::vector<int> labels;
  Vector dist;  // squared distance to the assigned centroid
  double sse = 0.0;
};

Assignment assign(const Matrix& x, const Matrix& c) {
  Assignment a;
  const Eigen::Index n = x.rows();
  a.labels.assign(static_cast<std::size_t>(n), 0);
  a.dist.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    a.labels[static_cast<std::size_t>(i)] = arg;
    a.dist[i] = best;
  }
  a.sse = a.dist.sum();
  return a;
}

Matrix plus_plus_seeds(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Matrix c(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  c.row(0) = x.row(pick(rng));
  Vector d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (std::size_t j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total <= 0.0) {
      chosen = pick(rng);
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    c.row(static_cast<Eigen::Index>(j)) = x.row(chosen);
    d2 = d2.cwiseMin((x.rowwise() - c.row(static_cast<Eigen::Index>(j))).rowwise().squaredNorm());
  }
  return c;
}

KMeansResult lloyd(const Matrix& x, Matrix c, const KMeansOptions& options) {
  KMeansResult r;
  const auto k = c.rows();
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    Assignment a = assign(x, c);
    r.sse_trace.push_back(a.sse);

    Matrix next = Matrix::Zero(k, x.cols());
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      next.row(a.labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) {
        next.row(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
        continue;
      }
      // empty cluster: move it onto the worst-served point
      Eigen::Index far = 0;
      a.dist.maxCoeff(&far);
      next.row(j) = x.row(far);
      a.dist[far] = 0.0;
    }
    const double shift = (next - c).rowwise().norm().maxCoeff();
    c = std::move(next);
    if (shift < options.tolerance) break;
  }
  Assignment final = assign(x, c);
  r.sse_trace.push_back(final.sse);
  r.centroids = std::move(c);
  r.labels = std::move(final.labels);
  r.sse = final.sse;
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, KMeansOptions options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1 || n < k) throw ContractError("kmeans: need n >= k >= 1");
  if (options.restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    KMeansResult cur = lloyd(points, plus_plus_seeds(points, k, rng), options);
    if (!have || cur.sse < best.sse) {
      best = std::move(cur);
      have = true;
    }
  }
  return best;
}

double sum_squared_error(const Matrix& points, const Matrix& centroids, std::span<const int> labels) {
  if (labels.size() != static_cast<std::size_t>(points.rows())) {
    throw MismatchError("sum_squared_error: label count != point count");
  }
  double sse = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sse += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return sse;
}

}  // namespace gclgcn
