#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "atpe/history.hpp"
#include "atpe/rng.hpp"
#include "atpe/space.hpp"

// Classic Tree-structured Parzen Estimator suggest step.
//
// All continuous and integer dimensions are modelled in the encoded unit
// interval. Each observation contributes a Gaussian truncated to [0, 1]; one
// extra wide component centred at 0.5 stands in for the prior.

namespace atpe::tpe {

struct TpeConfig {
  double gamma = 0.25;
  std::size_t n_ei_candidates = 24;
  std::size_t good_cap = 25;

  friend bool operator==(const TpeConfig&, const TpeConfig&) = default;
};

/// Raised when a model is requested from an empty history; callers should
/// fall back to prior sampling.
struct EmptyHistory : std::logic_error {
  EmptyHistory() : std::logic_error("tpe: empty history, use prior sampling") {}
};

struct Split {
  std::vector<Trial> good;
  std::vector<Trial> bad;
};

inline std::size_t good_count(std::size_t n, const TpeConfig& cfg) {
  const auto k = static_cast<std::size_t>(std::ceil(cfg.gamma * std::sqrt(static_cast<double>(n))));
  return std::min(k, cfg.good_cap);
}

inline Split split_history(const History& history, const TpeConfig& cfg) {
  if (history.empty()) throw EmptyHistory();
  const auto order = history.order_by_loss();
  const auto n_good = std::min(good_count(history.size(), cfg), history.size());
  Split s;
  s.good.reserve(n_good);
  s.bad.reserve(history.size() - n_good);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_good ? s.good : s.bad).push_back(history[order[i]]);
  return s;
}

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

/// Mixture of Gaussians, each truncated to [0, 1] and renormalised.
class TruncatedMixture {
 public:
  TruncatedMixture() = default;

  TruncatedMixture(std::vector<double> centers, std::vector<double> bandwidths,
                   std::vector<double> weights)
      : centers_(std::move(centers)), bandwidths_(std::move(bandwidths)), weights_(std::move(weights)) {
    log_coef_.resize(centers_.size());
    cumulative_.resize(centers_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double mu = centers_[k];
      const double sd = bandwidths_[k];
      const double mass = detail::normal_cdf((1.0 - mu) / sd) - detail::normal_cdf((0.0 - mu) / sd);
      log_coef_[k] = std::log(weights_[k]) - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi) -
                     std::log(mass);
      acc += weights_[k];
      cumulative_[k] = acc;
    }
  }

  std::size_t size() const noexcept { return centers_.size(); }
  const std::vector<double>& centers() const noexcept { return centers_; }
  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  double log_pdf(double x) const {
    if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
    thread_local std::vector<double> terms;
    terms.resize(centers_.size());
    for (std::size_t k = 0; k < centers_.size(); ++k) {
      const double z = (x - centers_[k]) / bandwidths_[k];
      terms[k] = log_coef_[k] - 0.5 * z * z;
    }
    return detail::log_sum_exp(terms);
  }

  template <RandomSource Rng>
  double sample(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), size() - 1);
    for (;;) {
      const double x = centers_[k] + bandwidths_[k] * rng.normal();
      if (x >= 0.0 && x <= 1.0) return x;
    }
  }

 private:
  std::vector<double> centers_;
  std::vector<double> bandwidths_;
  std::vector<double> weights_;
  std::vector<double> log_coef_;
  std::vector<double> cumulative_;
};

/// Add-one smoothed frequency table over a categorical dimension.
class CategoricalTable {
 public:
  CategoricalTable() = default;
  explicit CategoricalTable(std::vector<double> weights) : weights_(std::move(weights)) {}

  const std::vector<double>& weights() const noexcept { return weights_; }
  double log_pmf(std::size_t i) const { return std::log(weights_.at(i)); }

  template <RandomSource Rng>
  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t i = 0; i + 1 < weights_.size(); ++i) {
      if (u < weights_[i]) return i;
      u -= weights_[i];
    }
    return weights_.size() - 1;
  }

 private:
  std::vector<double> weights_;
};

using DimensionEstimator = std::variant<TruncatedMixture, CategoricalTable>;

/// One density estimator per dimension.
struct DensityModel {
  std::vector<DimensionEstimator> dims;

  /// Log density of an encoded point (categoricals as choice indices).
  double log_density(std::span<const double> encoded, const SearchSpace& space) const {
    double s = 0.0;
    for (std::size_t d = 0; d < dims.size(); ++d) s += log_density(d, encoded[d], space[d]);
    return s;
  }

  double log_density(std::size_t d, double u, const HyperparameterSpec& spec) const {
    if (auto m = std::get_if<TruncatedMixture>(&dims[d])) return m->log_pdf(u);
    const auto k = spec.choices.size() - 1;
    return std::get<CategoricalTable>(dims[d]).log_pmf(
        static_cast<std::size_t>(std::llround(u * static_cast<double>(k))));
  }
};

struct ParzenModel {
  DensityModel good;
  DensityModel bad;
};

/// Truncated mixture over encoded observations plus a prior component at
/// 0.5 with bandwidth 1. Bandwidth of an observation is the larger gap to
/// its sorted neighbours (domain edges included), clipped to
/// [1/min(100, N+2), 1].
inline TruncatedMixture fit_continuous(std::vector<double> obs) {
  std::sort(obs.begin(), obs.end());
  const std::size_t n = obs.size();
  const double min_bw = 1.0 / static_cast<double>(std::min<std::size_t>(100, n + 2));
  std::vector<double> centers, bws;
  centers.reserve(n + 1);
  bws.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i == 0 ? 0.0 : obs[i - 1];
    const double right = i + 1 == n ? 1.0 : obs[i + 1];
    const double bw = std::max(obs[i] - left, right - obs[i]);
    centers.push_back(obs[i]);
    bws.push_back(std::clamp(bw, min_bw, 1.0));
  }
  centers.push_back(0.5);
  bws.push_back(1.0);
  std::vector<double> w(n + 1, 1.0 / static_cast<double>(n + 1));
  return TruncatedMixture(std::move(centers), std::move(bws), std::move(w));
}

inline CategoricalTable fit_categorical(std::span<const std::size_t> obs, std::size_t n_choices) {
  std::vector<double> w(n_choices, 1.0);
  for (auto o : obs) w.at(o) += 1.0;
  const double denom = static_cast<double>(obs.size() + n_choices);
  for (auto& x : w) x /= denom;
  return CategoricalTable(std::move(w));
}

/// Per-dimension estimator over the given trials. An empty trial set
/// yields the prior (prior component only / uniform table).
inline DensityModel fit_parzen(std::span<const Trial> trials, const SearchSpace& space) {
  DensityModel m;
  m.dims.reserve(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const auto& spec = space[d];
    if (spec.is_categorical()) {
      std::vector<std::size_t> obs;
      obs.reserve(trials.size());
      for (const auto& t : trials) obs.push_back(std::get<Choice>(t.config[d]).index);
      m.dims.emplace_back(fit_categorical(obs, spec.choices.size()));
    } else {
      std::vector<double> obs;
      obs.reserve(trials.size());
      for (const auto& t : trials) obs.push_back(encode_value(spec, t.config[d]));
      m.dims.emplace_back(fit_continuous(std::move(obs)));
    }
  }
  return m;
}

inline ParzenModel fit_model(const Split& split, const SearchSpace& space) {
  return {fit_parzen(split.good, space), fit_parzen(split.bad, space)};
}

/// Candidates drawn from the good density and their scores; filled by
/// suggest when requested.
struct SuggestTrace {
  std::vector<Config> candidates;
  std::vector<double> scores;
  std::size_t chosen = 0;
};

/// Sum over dimensions of log l(x_d) - log g(x_d).
inline double score(const ParzenModel& model, const Config& config, const SearchSpace& space) {
  double s = 0.0;
  for (std::size_t d = 0; d < space.size(); ++d) {
    const double u = encode_value(space[d], config[d]);
    s += model.good.log_density(d, u, space[d]) - model.bad.log_density(d, u, space[d]);
  }
  return s;
}

template <RandomSource Rng>
Config draw_candidate(const DensityModel& good, const SearchSpace& space, Rng& rng) {
  Config c;
  c.reserve(space.size());
  for (std::size_t d = 0; d < space.size(); ++d) {
    const auto& spec = space[d];
    if (auto table = std::get_if<CategoricalTable>(&good.dims[d])) {
      c.push_back(Choice{table->sample(rng)});
    } else {
      c.push_back(decode_value(spec, std::get<TruncatedMixture>(good.dims[d]).sample(rng)));
    }
  }
  return c;
}

/// One TPE step. Empty history falls back to a prior draw.
template <RandomSource Rng>
Config suggest(const History& history, const SearchSpace& space, const TpeConfig& cfg, Rng& rng,
               SuggestTrace* trace = nullptr) {
  if (history.empty()) return sample_prior(space, rng);
  const auto model = fit_model(split_history(history, cfg), space);

  Config best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cfg.n_ei_candidates; ++i) {
    auto candidate = draw_candidate(model.good, space, rng);
    const double s = score(model, candidate, space);
    if (best.empty() || s > best_score) {
      best_score = s;
      best = candidate;
      if (trace) trace->chosen = i;
    }
    if (trace) {
      trace->candidates.push_back(std::move(candidate));
      trace->scores.push_back(s);
    }
  }
  return best;
}

}  // namespace atpe::tpe
