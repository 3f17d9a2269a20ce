#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "atpe/rng.hpp"

namespace atpe {

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;

  /// Members of every non-empty cluster, each list in input order.
  std::vector<std::vector<std::size_t>> clusters() const {
    std::vector<std::vector<std::size_t>> out(centroids.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    std::erase_if(out, [](const auto& c) { return c.empty(); });
    return out;
  }

  /// Sum of squared distances from each point to its centroid.
  double inertia(const std::vector<std::vector<double>>& points) const {
    double s = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const auto& c = centroids[assignment[i]];
      for (std::size_t j = 0; j < c.size(); ++j) s += (points[i][j] - c[j]) * (points[i][j] - c[j]);
    }
    return s;
  }
};

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Lloyd's algorithm with k-means++ seeding and a fixed iteration count.
/// k is clamped to the number of points.
template <RandomSource Rng>
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, Rng& rng,
                    std::size_t iterations = 20) {
  KMeansResult r;
  const std::size_t n = points.size();
  if (n == 0 || k == 0) return r;
  k = std::min(k, n);

  r.centroids.push_back(points[rng.index(n)]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], r.centroids.back()));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (u < d2[i]) {
          pick = i;
          break;
        }
        u -= d2[i];
      }
    } else {
      pick = rng.index(n);
    }
    r.centroids.push_back(points[pick]);
  }

  r.assignment.assign(n, 0);
  const std::size_t dim = points.front().size();
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i], r.centroids[c]);
        if (d < best) {
          best = d;
          r.assignment[i] = c;
        }
      }
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[r.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[r.assignment[i]][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < dim; ++j)
        r.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return r;
}

}  // namespace atpe
