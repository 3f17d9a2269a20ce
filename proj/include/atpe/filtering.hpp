#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>
#include <vector>

#include "atpe/history.hpp"
#include "atpe/kmeans.hpp"
#include "atpe/rng.hpp"
#include "atpe/space.hpp"

// History reduction applied before the TPE model is fitted.

namespace atpe::filtering {

enum class FilterMode { none, random, age, loss, clustering, zscore };

inline constexpr std::size_t kFilterModeCount = 6;

inline constexpr std::string_view to_string(FilterMode m) {
  switch (m) {
    case FilterMode::none: return "none";
    case FilterMode::random: return "random";
    case FilterMode::age: return "age";
    case FilterMode::loss: return "loss";
    case FilterMode::clustering: return "clustering";
    case FilterMode::zscore: return "zscore";
  }
  return "?";
}

struct FilterParams {
  FilterMode mode = FilterMode::none;
  double random_probability = 0.0;  // [0, 1]
  double age_multiplier = 0.0;      // >= 0
  double loss_multiplier = 0.0;     // >= 0
  double clusters_quantile = 1.0;   // (0, 1]
  double zscore_threshold = 0.0;    // [-3, 3]
};

enum class FilterStatus {
  ok,
  /// Everything was filtered out; the incumbent was returned alone.
  best_only,
  /// zscore mode on a history with zero loss spread; nothing was filtered.
  zero_spread,
};

struct FilterResult {
  History history;
  FilterStatus status = FilterStatus::ok;
};

/// Population z-scores of the losses. Empty when the spread is zero.
inline std::vector<double> zscores(const History& h) {
  const auto n = static_cast<double>(h.size());
  double mean = 0.0;
  for (const auto& t : h) mean += t.loss;
  mean /= n;
  double var = 0.0;
  for (const auto& t : h) var += (t.loss - mean) * (t.loss - mean);
  const double sd = std::sqrt(var / n);
  if (!(sd > 0.0)) return {};
  std::vector<double> z;
  z.reserve(h.size());
  for (const auto& t : h) z.push_back((t.loss - mean) / sd);
  return z;
}

/// Rank of every position (1-based) under the given ordering.
inline std::vector<std::size_t> ranks_of(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> r(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = i + 1;
  return r;
}

template <RandomSource Rng>
FilterResult filter_history(const History& history, const FilterParams& p, const SearchSpace& space,
                            Rng& rng) {
  const std::size_t n = history.size();
  if (n == 0 || p.mode == FilterMode::none) return {history, FilterStatus::ok};

  std::vector<std::size_t> keep;
  keep.reserve(n);
  const double nd = static_cast<double>(n);

  switch (p.mode) {
    case FilterMode::none:
      break;
    case FilterMode::random:
      for (std::size_t i = 0; i < n; ++i)
        if (!rng.bernoulli(p.random_probability)) keep.push_back(i);
      break;
    case FilterMode::age:
      // Positions are chronological; the newest trial has age rank 1.
      for (std::size_t i = 0; i < n; ++i) {
        const double rank = static_cast<double>(n - i);
        if (!rng.bernoulli(std::min(1.0, p.age_multiplier * rank / nd))) keep.push_back(i);
      }
      break;
    case FilterMode::loss: {
      const auto rank = ranks_of(history.order_by_loss());
      for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(rank[i]);
        if (!rng.bernoulli(std::min(1.0, p.loss_multiplier * r / nd))) keep.push_back(i);
      }
      break;
    }
    case FilterMode::clustering: {
      const auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(p.clusters_quantile * nd)));
      std::vector<std::vector<double>> points;
      points.reserve(n);
      for (const auto& t : history) points.push_back(encode_numeric(t.config, space));
      const auto result = kmeans(points, k, rng);
      for (const auto& members : result.clusters()) keep.push_back(members[rng.index(members.size())]);
      std::sort(keep.begin(), keep.end());
      break;
    }
    case FilterMode::zscore: {
      const auto z = zscores(history);
      if (z.empty()) return {history, FilterStatus::zero_spread};
      const double t = std::abs(p.zscore_threshold);
      for (std::size_t i = 0; i < n; ++i) {
        const bool selected = p.zscore_threshold < 0.0 ? z[i] > t : z[i] < 3.0 - t;
        if (selected) keep.push_back(i);
      }
      break;
    }
  }

  if (keep.empty()) return {history.select({history.best_index()}), FilterStatus::best_only};
  return {history.select(keep), FilterStatus::ok};
}

}  // namespace atpe::filtering
