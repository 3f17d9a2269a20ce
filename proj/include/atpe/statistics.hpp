#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "atpe/blocking.hpp"
#include "atpe/history.hpp"

// Fixed-length description of the optimisation state, fed to the
// parameter predictor.

namespace atpe::stats {

inline constexpr std::size_t kStatCount = 7;
inline constexpr std::size_t kRangeCount = 7;
inline constexpr std::size_t kFeatureCount = kRangeCount * kStatCount + kStatCount;

inline constexpr std::array<std::string_view, kStatCount> kStatNames{
    "max_p25", "max_p50", "max_p75", "kurtosis", "p25_p5", "skewness", "std_max"};

enum class RangeKind { all, last, top };

struct SampleRange {
  std::string_view name;
  RangeKind kind;
  std::size_t count;
};

inline constexpr std::array<SampleRange, kRangeCount> kRanges{{
    {"all", RangeKind::all, 0},
    {"last10", RangeKind::last, 10},
    {"last15", RangeKind::last, 15},
    {"last25", RangeKind::last, 25},
    {"top10", RangeKind::top, 10},
    {"top20", RangeKind::top, 20},
    {"top30", RangeKind::top, 30},
}};

using StatisticsVector = std::array<double, kFeatureCount>;

/// Feature names in vector order: loss.<range>.<stat> then corr.<stat>.
inline std::vector<std::string> feature_names() {
  std::vector<std::string> out;
  out.reserve(kFeatureCount);
  for (const auto& r : kRanges)
    for (auto s : kStatNames) out.push_back("loss." + std::string(r.name) + "." + std::string(s));
  for (auto s : kStatNames) out.push_back("corr." + std::string(s));
  return out;
}

/// Linear-interpolation percentile of sorted values, q in [0, 1].
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // population
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  for (double x : v) m.mean += x;
  m.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  // Relative cutoff keeps float noise on constant inputs from producing
  // huge standardised moments.
  const double scale = std::max(1.0, m.mean * m.mean);
  if (m2 > 1e-24 * scale) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

/// Ratio with the zero-denominator convention: 0/0 = 1, x/0 = kRatioCap.
inline constexpr double kRatioCap = 1e6;

inline double safe_ratio(double num, double den) {
  if (den > 0.0) return std::min(num / den, kRatioCap);
  return num > 0.0 ? kRatioCap : 1.0;
}

/// The seven statistics of one sample. With `shift`, ratios are taken on
/// v - min(v) + 1; moments never depend on the shift.
inline std::array<double, kStatCount> describe(std::vector<double> v, bool shift) {
  std::array<double, kStatCount> out{1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0};
  if (v.empty()) return out;
  const auto mom = moments(v);
  std::sort(v.begin(), v.end());
  if (shift) {
    const double lo = v.front();
    for (auto& x : v) x = x - lo + 1.0;
  }
  const double mx = v.back();
  const double p5 = percentile_sorted(v, 0.05);
  const double p25 = percentile_sorted(v, 0.25);
  const double p50 = percentile_sorted(v, 0.50);
  const double p75 = percentile_sorted(v, 0.75);
  const bool constant = v.front() == v.back();
  out[0] = constant ? 1.0 : safe_ratio(mx, p25);
  out[1] = constant ? 1.0 : safe_ratio(mx, p50);
  out[2] = constant ? 1.0 : safe_ratio(mx, p75);
  out[3] = mom.kurtosis;
  out[4] = constant ? 1.0 : safe_ratio(p25, p5);
  out[5] = mom.skewness;
  out[6] = constant ? 0.0 : safe_ratio(std::sqrt(mom.variance), mx);
  return out;
}

/// Losses of one sample range: newest-k, best-k, or everything.
inline std::vector<double> range_losses(const History& h, const SampleRange& r) {
  std::vector<double> out;
  const std::size_t n = h.size();
  switch (r.kind) {
    case RangeKind::all:
      return h.losses();
    case RangeKind::last:
      for (std::size_t i = n - std::min(n, r.count); i < n; ++i) out.push_back(h[i].loss);
      return out;
    case RangeKind::top: {
      const auto order = h.order_by_loss();
      for (std::size_t i = 0; i < std::min(n, r.count); ++i) out.push_back(h[order[i]].loss);
      return out;
    }
  }
  return out;
}

/// Loss statistics per range, then statistics of the per-dimension |rho|
/// (all zeros when there are no numeric dimensions).
inline StatisticsVector compute_statistics(const History& history,
                                           const blocking::CorrelationReport& correlations) {
  StatisticsVector out{};
  std::size_t k = 0;
  for (const auto& r : kRanges)
    for (double x : describe(range_losses(history, r), true)) out[k++] = x;
  if (correlations.empty()) {
    for (std::size_t i = 0; i < kStatCount; ++i) out[k++] = 0.0;
  } else {
    for (double x : describe(correlations.abs_rho(), false)) out[k++] = x;
  }
  return out;
}

}  // namespace atpe::stats
