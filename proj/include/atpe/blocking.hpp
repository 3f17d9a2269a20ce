#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string_view>
#include <vector>

#include "atpe/history.hpp"
#include "atpe/rng.hpp"
#include "atpe/space.hpp"

// Hyperparameter blocking: which dimensions get locked for one iteration,
// and which values they are locked to.

namespace atpe::blocking {

enum class CutoffMode { count_original, count_reversed, threshold };
enum class ProbabilityMode { fixed, correlation_weighted };
enum class ValueMode { random, elite };

inline constexpr std::string_view to_string(CutoffMode m) {
  switch (m) {
    case CutoffMode::count_original: return "count_original";
    case CutoffMode::count_reversed: return "count_reversed";
    case CutoffMode::threshold: return "threshold";
  }
  return "?";
}

struct BlockingParams {
  double secondary_cutoff = 0.0;      // [-1, 1]
  double correlation_exponent = 1.0;  // > 0
  CutoffMode cutoff_mode = CutoffMode::count_original;
  ProbabilityMode probability_mode = ProbabilityMode::fixed;
  double fixed_probability = 0.5;       // [0, 1]
  double correlation_multiplier = 1.0;  // >= 0
  ValueMode value_mode = ValueMode::elite;
  double elite_percentile = 0.3;  // (0, 1]
  double anova_exponent = 1.0;    // > 0
  double cat_cutoff = 0.0;        // [-1, 1]
  double anova_multiplier = 1.0;  // >= 0
};

// ---------------------------------------------------------------------------
// Rank statistics

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;
};

/// rho = 1 - 6 sum d^2 / (n (n^2 - 1)) over average ranks, clamped to
/// [-1, 1] (ties can push the closed form slightly outside).
inline SpearmanResult spearman(const std::vector<double>& values, const std::vector<double>& losses) {
  const std::size_t n = values.size();
  if (n < 2) return {0.0, true};
  const auto rv = average_ranks(values);
  const auto rl = average_ranks(losses);
  const bool const_v = std::all_of(values.begin(), values.end(), [&](double x) { return x == values[0]; });
  const bool const_l = std::all_of(losses.begin(), losses.end(), [&](double x) { return x == losses[0]; });
  if (const_v || const_l) return {0.0, true};
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rv[i] - rl[i]) * (rv[i] - rl[i]);
  const double nd = static_cast<double>(n);
  const double rho = 1.0 - 6.0 * d2 / (nd * (nd * nd - 1.0));
  return {std::clamp(rho, -1.0, 1.0), false};
}

/// Spearman correlation between one dimension (encoded) and the loss.
inline SpearmanResult spearman(const History& history, const SearchSpace& space, std::size_t dim) {
  std::vector<double> v, l;
  v.reserve(history.size());
  l.reserve(history.size());
  for (const auto& t : history) {
    v.push_back(encode_value(space[dim], t.config[dim]));
    l.push_back(t.loss);
  }
  return spearman(v, l);
}

// ---------------------------------------------------------------------------
// Reports

struct CorrelationEntry {
  std::size_t dim = 0;
  double rho = 0.0;
  double weighted = 0.0;
  bool degenerate = false;
};

/// Entries are kept in descending order of `weighted`, ties by space order.
struct CorrelationReport {
  std::vector<CorrelationEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<double> weighted() const {
    std::vector<double> w;
    for (const auto& e : entries) w.push_back(e.weighted);
    return w;
  }
  std::vector<double> abs_rho() const {
    std::vector<double> w;
    for (const auto& e : entries) w.push_back(std::abs(e.rho));
    return w;
  }
};

template <class Entry>
void sort_descending(std::vector<Entry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.weighted != b.weighted) return a.weighted > b.weighted;
    return a.dim < b.dim;
  });
}

inline CorrelationReport reweight(CorrelationReport report, double exponent) {
  for (auto& e : report.entries) e.weighted = std::pow(std::abs(e.rho), exponent);
  sort_descending(report.entries);
  return report;
}

/// One entry per non-categorical dimension with at least two distinct
/// observed values.
inline CorrelationReport correlation_report(const History& history, const SearchSpace& space,
                                            double exponent) {
  CorrelationReport r;
  for (std::size_t d = 0; d < space.size(); ++d) {
    if (space[d].is_categorical()) continue;
    std::vector<double> v, l;
    for (const auto& t : history) {
      v.push_back(encode_value(space[d], t.config[d]));
      l.push_back(t.loss);
    }
    if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) continue;
    const auto s = spearman(v, l);
    r.entries.push_back({d, s.rho, 0.0, s.degenerate});
  }
  return reweight(std::move(r), exponent);
}

struct AnovaEntry {
  std::size_t dim = 0;
  double f_stat = 0.0;
  double weighted = 0.0;
  bool degenerate = false;
};

struct AnovaReport {
  std::vector<AnovaEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<double> weighted() const {
    std::vector<double> w;
    for (const auto& e : entries) w.push_back(e.weighted);
    return w;
  }
};

struct FStat {
  double f = 0.0;
  bool degenerate = false;
};

/// One-way ANOVA F of losses grouped by label. Degenerate (F = 0) with
/// fewer than two groups, no residual degrees of freedom, or zero
/// within-group variance.
inline FStat one_way_f(const std::vector<std::size_t>& groups, const std::vector<double>& losses) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  double total = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    auto& a = acc[groups[i]];
    a.first += losses[i];
    ++a.second;
    total += losses[i];
  }
  const std::size_t n = groups.size();
  const std::size_t k = acc.size();
  if (k < 2 || n <= k) return {0.0, true};
  const double grand = total / static_cast<double>(n);
  double ssb = 0.0;
  for (const auto& [g, a] : acc) {
    const double m = a.first / static_cast<double>(a.second);
    ssb += static_cast<double>(a.second) * (m - grand) * (m - grand);
  }
  double ssw = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = acc[groups[i]];
    const double m = a.first / static_cast<double>(a.second);
    ssw += (losses[i] - m) * (losses[i] - m);
  }
  if (!(ssw > 0.0)) return {0.0, true};
  const double f = (ssb / static_cast<double>(k - 1)) / (ssw / static_cast<double>(n - k));
  return {f, false};
}

inline AnovaReport anova_report(const History& history, const SearchSpace& space, double exponent) {
  AnovaReport r;
  for (std::size_t d = 0; d < space.size(); ++d) {
    if (!space[d].is_categorical()) continue;
    std::vector<std::size_t> g;
    std::vector<double> l;
    for (const auto& t : history) {
      g.push_back(std::get<Choice>(t.config[d]).index);
      l.push_back(t.loss);
    }
    const auto f = one_way_f(g, l);
    r.entries.push_back({d, f.f, std::pow(std::abs(f.f), exponent), f.degenerate});
  }
  sort_descending(r.entries);
  return r;
}

// ---------------------------------------------------------------------------
// Candidate selection

namespace detail {

inline std::size_t floor_count(double c, std::size_t n) {
  // Guard against 1/n * n landing just under an integer.
  return static_cast<std::size_t>(std::floor(std::abs(c) * static_cast<double>(n) + 1e-9));
}

/// Prefix (high side) or suffix (low side) positions of a descending sequence.
inline std::vector<std::size_t> take(std::size_t n, std::size_t m, bool highest) {
  std::vector<std::size_t> pos;
  m = std::min(m, n);
  for (std::size_t i = 0; i < m; ++i) pos.push_back(highest ? i : n - m + i);
  return pos;
}

/// Greedy cumulative selection against threshold T: prefix of the
/// descending sequence while G(i) <= T, or suffix while L(i) <= T.
inline std::vector<std::size_t> cumulative(const std::vector<double>& w, double t, bool highest) {
  const std::size_t n = w.size();
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double tol = 1e-12 * std::max(1.0, std::abs(total));
  std::vector<std::size_t> pos;
  double acc = 0.0;
  if (highest) {
    for (std::size_t i = 0; i < n; ++i) {
      acc += w[i];
      if (acc > t + tol) break;
      pos.push_back(i);
    }
  } else {
    for (std::size_t i = n; i-- > 0;) {
      acc += w[i];
      if (acc > t + tol) break;
      pos.push_back(i);
    }
    std::reverse(pos.begin(), pos.end());
  }
  return pos;
}

template <class Report>
std::vector<std::size_t> to_dims(const Report& report, const std::vector<std::size_t>& positions) {
  std::vector<std::size_t> dims;
  for (auto p : positions) dims.push_back(report.entries[p].dim);
  return dims;
}

}  // namespace detail

/// Blocking candidates among numeric dimensions; returns space indices in
/// report order.
inline std::vector<std::size_t> select_numeric_candidates(const CorrelationReport& report,
                                                          const BlockingParams& p) {
  const std::size_t n = report.size();
  const double c = p.secondary_cutoff;
  std::vector<std::size_t> pos;
  switch (p.cutoff_mode) {
    case CutoffMode::count_original:
      if (c != 0.0) pos = detail::take(n, detail::floor_count(c, n), c < 0.0);
      break;
    case CutoffMode::count_reversed:
      pos = detail::take(n, n - detail::floor_count(c, n), c <= 0.0);
      break;
    case CutoffMode::threshold: {
      const auto w = report.weighted();
      const double t = std::accumulate(w.begin(), w.end(), 0.0) * std::abs(c);
      pos = detail::cumulative(w, t, c >= 0.0);
      break;
    }
  }
  return detail::to_dims(report, pos);
}

/// Blocking candidates among categorical dimensions, T = sum * (1 - |beta|).
inline std::vector<std::size_t> select_categorical_candidates(const AnovaReport& report,
                                                              const BlockingParams& p) {
  const auto w = report.weighted();
  const double beta = p.cat_cutoff;
  const double t = std::accumulate(w.begin(), w.end(), 0.0) * (1.0 - std::abs(beta));
  return detail::to_dims(report, detail::cumulative(w, t, beta >= 0.0));
}

/// Random subset of the candidates. `weighted_of(dim)` gives the weighted
/// correlation/ANOVA score used in correlation-weighted mode.
template <RandomSource Rng, class WeightFn>
std::vector<std::size_t> choose_locked(const std::vector<std::size_t>& candidates, ProbabilityMode mode,
                                       double fixed_probability, double multiplier, WeightFn weighted_of,
                                       Rng& rng) {
  std::vector<std::size_t> out;
  for (auto d : candidates) {
    const double p = mode == ProbabilityMode::fixed ? fixed_probability
                                                     : std::min(1.0, weighted_of(d) * multiplier);
    if (rng.bernoulli(p)) out.push_back(d);
  }
  return out;
}

template <class Report>
double weighted_for(const Report& report, std::size_t dim) {
  for (const auto& e : report.entries)
    if (e.dim == dim) return e.weighted;
  return 0.0;
}

template <RandomSource Rng>
std::vector<std::size_t> choose_locked(const std::vector<std::size_t>& candidates,
                                       const CorrelationReport& report, const BlockingParams& p, Rng& rng) {
  return choose_locked(candidates, p.probability_mode, p.fixed_probability, p.correlation_multiplier,
                       [&](std::size_t d) { return weighted_for(report, d); }, rng);
}

template <RandomSource Rng>
std::vector<std::size_t> choose_locked(const std::vector<std::size_t>& candidates, const AnovaReport& report,
                                       const BlockingParams& p, Rng& rng) {
  return choose_locked(candidates, p.probability_mode, p.fixed_probability, p.anova_multiplier,
                       [&](std::size_t d) { return weighted_for(report, d); }, rng);
}

struct LockedValue {
  std::size_t dim = 0;
  ParamValue value;
};

/// Values for the locked dimensions, each drawn independently from a
/// random trial (random mode) or from the best ceil(percentile * N) trials.
template <RandomSource Rng>
std::vector<LockedValue> assign_locked_values(const std::vector<std::size_t>& locked, const History& history,
                                              const BlockingParams& p, Rng& rng) {
  std::vector<LockedValue> out;
  if (locked.empty()) return out;
  std::vector<std::size_t> pool;
  if (p.value_mode == ValueMode::elite) {
    pool = history.order_by_loss();
    const auto n_elite = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(p.elite_percentile * static_cast<double>(history.size()))), 1,
        history.size());
    pool.resize(n_elite);
  } else {
    pool.resize(history.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }
  for (auto d : locked) out.push_back({d, history[pool[rng.index(pool.size())]].config[d]});
  return out;
}

}  // namespace atpe::blocking
