// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gclgcn {

struct KMeansOptions {
  std::size_t restarts = 20;
  std::size_t max_iterations = 300;
  double tolerance = 1e-4;  // max centroid shift (Euclidean) to stop
};

struct KMeansResult {
  Matrix centroids;               // k x d
  std::vector<int> labels;        // length n
  double sse = 0.0;
  std::vector<double> sse_trace;  // per Lloyd assignment step of the winning restart
};

/// Lloyd's algorithm from k-means++ seeds; best-SSE restart wins (ties by
/// restart index). An empty cluster is re-seeded at the point farthest from
/// its current centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, KMeansOptions options = {});

/// Sum of squared distances of each point to its labelled centroid.
double sum_squared_error(const Matrix& points, const Matrix& centroids, std::span<const int> labels);

// --- metrics -----------------------------------------------------------------------

/// Minimum-cost perfect assignment on a square cost matrix; returns the
/// column assigned to each row.
std::vector<int> hungarian(const Matrix& cost);

/// Bijection pred label -> truth label maximizing agreement. Labels absent
/// from either side are padded so the mapping is total over pred labels.
std::vector<int> best_label_mapping(std::span<const int> pred, std::span<const int> truth);

double accuracy(std::span<const int> pred, std::span<const int> truth);

enum class NmiNormalization { Geometric, Arithmetic };

double nmi(std::span<const int> pred, std::span<const int> truth,
           NmiNormalization norm = NmiNormalization::Geometric);

double ari(std::span<const int> pred, std::span<const int> truth);

/// Macro F1 after mapping predicted labels through best_label_mapping.
double f1_macro(std::span<const int> pred, std::span<const int> truth);

struct MetricRow {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
  double f1 = 0.0;

  double composite() const { return (acc + nmi + ari + f1) / 4.0; }
};

MetricRow evaluate(std::span<const int> pred, std::span<const int> truth,
                   NmiNormalization norm = NmiNormalization::Geometric);

}  // namespace gclgcn
