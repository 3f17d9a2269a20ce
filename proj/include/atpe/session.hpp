#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "atpe/blocking.hpp"
#include "atpe/filtering.hpp"
#include "atpe/history.hpp"
#include "atpe/params.hpp"
#include "atpe/rng.hpp"
#include "atpe/space.hpp"
#include "atpe/statistics.hpp"
#include "atpe/tpe.hpp"

namespace atpe {

/// What the adaptive layer decided in the most recent ask().
struct StepDecision {
  bool adaptive = false;
  AtpeParams params;
  stats::StatisticsVector statistics{};
  filtering::FilterStatus filter_status = filtering::FilterStatus::ok;
  std::size_t filtered_size = 0;
  std::vector<blocking::LockedValue> locked;
};

/// History restricted to the given dimensions (ids and losses preserved).
inline History project(const History& h, const std::vector<std::size_t>& dims) {
  History out;
  for (const auto& t : h) {
    Config c;
    c.reserve(dims.size());
    for (auto d : dims) c.push_back(t.config[d]);
    out.push(Trial{t.id, std::move(c), t.loss, t.iteration});
  }
  return out;
}

/// Ask/tell driver for one optimisation run.
///
/// Each ask() runs: statistics on the full history, parameter prediction,
/// history filtering, blocking, TPE on the unlocked dimensions, and a merge
/// of the locked values. Fewer than `warmup` trials means a prior draw; the
/// plain `tpe` variant skips the adaptive layer entirely.
class OptimizerSession {
 public:
  static constexpr std::size_t kDefaultWarmup = 10;

  OptimizerSession(SearchSpace space, Variant variant, std::uint64_t seed,
                   std::shared_ptr<const ParamController> controller = nullptr,
                   std::size_t warmup = kDefaultWarmup)
      : space_(std::move(space)),
        variant_(variant),
        traits_(traits(variant)),
        controller_(controller ? std::move(controller) : std::make_shared<DefaultController>()),
        rng_(seed, 0),
        warmup_(warmup) {}

  const SearchSpace& space() const noexcept { return space_; }
  const History& history() const noexcept { return history_; }
  Variant variant() const noexcept { return variant_; }
  const VariantTraits& variant_traits() const noexcept { return traits_; }
  const std::optional<Trial>& incumbent() const noexcept { return incumbent_; }
  const StepDecision& last_decision() const noexcept { return decision_; }
  RngStream& rng() noexcept { return rng_; }

  /// Repeated calls without an intervening tell() return the same config.
  Config ask() {
    if (!pending_) pending_ = suggest();
    return *pending_;
  }

  /// Records an evaluation. Non-finite losses and out-of-domain configs are
  /// rejected and leave the session unchanged.
  void tell(const Config& config, double loss) {
    if (!std::isfinite(loss)) throw std::invalid_argument("tell: loss must be finite");
    if (!in_domain(space_, config)) throw std::invalid_argument("tell: config outside the search space");
    history_.append(config, loss);
    if (!incumbent_ || loss < incumbent_->loss) incumbent_ = history_.trials().back();
    pending_.reset();
  }

 private:
  Config suggest() {
    decision_ = StepDecision{};
    if (!traits_.adaptive) return tpe::suggest(history_, space_, tpe::TpeConfig{}, rng_);
    if (history_.empty() || history_.size() < warmup_) return sample_prior(space_, rng_);

    decision_.adaptive = true;
    auto correlations = blocking::correlation_report(history_, space_, 1.0);
    decision_.statistics = stats::compute_statistics(history_, correlations);

    AtpeParams params = controller_->choose(decision_.statistics, traits_, rng_);
    params.blocking.cutoff_mode = traits_.cutoff_mode;
    if (!traits_.allows(params.filter.mode)) params.filter.mode = filtering::FilterMode::none;
    decision_.params = params;

    auto filtered = filtering::filter_history(history_, params.filter, space_, rng_);
    decision_.filter_status = filtered.status;
    decision_.filtered_size = filtered.history.size();

    const auto& bp = params.blocking;
    correlations = blocking::reweight(std::move(correlations), bp.correlation_exponent);
    auto locked = blocking::choose_locked(blocking::select_numeric_candidates(correlations, bp), correlations,
                                          bp, rng_);
    if (traits_.categorical_blocking) {
      const auto anova = blocking::anova_report(history_, space_, bp.anova_exponent);
      if (!anova.empty()) {
        auto cats = blocking::choose_locked(blocking::select_categorical_candidates(anova, bp), anova, bp, rng_);
        locked.insert(locked.end(), cats.begin(), cats.end());
      }
    }
    decision_.locked = blocking::assign_locked_values(locked, history_, bp, rng_);

    std::vector<bool> is_locked(space_.size(), false);
    for (const auto& lv : decision_.locked) is_locked[lv.dim] = true;
    std::vector<std::size_t> free;
    for (std::size_t d = 0; d < space_.size(); ++d)
      if (!is_locked[d]) free.push_back(d);

    Config out(space_.size());
    if (!free.empty()) {
      const auto sub = space_.subspace(free);
      const auto part = tpe::suggest(project(filtered.history, free), sub, params.tpe, rng_);
      for (std::size_t i = 0; i < free.size(); ++i) out[free[i]] = part[i];
    }
    for (const auto& lv : decision_.locked) out[lv.dim] = lv.value;
    return out;
  }

  SearchSpace space_;
  Variant variant_;
  VariantTraits traits_;
  std::shared_ptr<const ParamController> controller_;
  RngStream rng_;
  std::size_t warmup_;
  History history_;
  std::optional<Trial> incumbent_;
  StepDecision decision_;
  std::optional<Config> pending_;
};

}  // namespace atpe
