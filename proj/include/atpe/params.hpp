#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "atpe/blocking.hpp"
#include "atpe/filtering.hpp"
#include "atpe/rng.hpp"
#include "atpe/statistics.hpp"
#include "atpe/surrogate.hpp"
#include "atpe/tpe.hpp"

namespace atpe {

/// Per-iteration control vector of the adaptive optimizer.
struct AtpeParams {
  filtering::FilterParams filter;
  blocking::BlockingParams blocking;
  tpe::TpeConfig tpe;
};

// ---------------------------------------------------------------------------
// Variants

enum class Variant { tpe, atpe, atpe_r, atpe_f, atpe_cf, atpe_c, atpe_c_cf, atpe_cf_zscore };

inline constexpr std::array<Variant, 8> kAllVariants{Variant::tpe,    Variant::atpe,    Variant::atpe_r,
                                                     Variant::atpe_f, Variant::atpe_cf, Variant::atpe_c,
                                                     Variant::atpe_c_cf, Variant::atpe_cf_zscore};

inline constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::tpe: return "tpe";
    case Variant::atpe: return "atpe";
    case Variant::atpe_r: return "atpe-r";
    case Variant::atpe_f: return "atpe-f";
    case Variant::atpe_cf: return "atpe-cf";
    case Variant::atpe_c: return "atpe-c";
    case Variant::atpe_c_cf: return "atpe-c-cf";
    case Variant::atpe_cf_zscore: return "atpe-cf-zscore";
  }
  return "?";
}

inline std::string variant_list() {
  std::string s;
  for (auto v : kAllVariants) {
    if (!s.empty()) s += ", ";
    s += to_string(v);
  }
  return s;
}

/// Accepts both `atpe-cf` and `atpe_cf` spellings.
inline Variant variant_from_string(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '_', '-');
  for (auto v : kAllVariants)
    if (to_string(v) == n) return v;
  throw std::invalid_argument("unknown variant '" + std::string(name) + "' (valid: " + variant_list() + ")");
}

/// What a variant switches on.
struct VariantTraits {
  bool adaptive = true;
  blocking::CutoffMode cutoff_mode = blocking::CutoffMode::count_original;
  std::array<bool, filtering::kFilterModeCount> filter_menu{true, true, true, true, false, false};
  bool extended_atoms = false;
  bool categorical_blocking = false;

  bool allows(filtering::FilterMode m) const { return filter_menu[static_cast<std::size_t>(m)]; }
  surrogate::AtomPool atom_pool() const {
    return extended_atoms ? surrogate::extended_pool() : surrogate::base_pool();
  }
};

inline VariantTraits traits(Variant v) {
  using blocking::CutoffMode;
  VariantTraits t;
  switch (v) {
    case Variant::tpe:
      t.adaptive = false;
      break;
    case Variant::atpe:
      break;
    case Variant::atpe_r:
      t.cutoff_mode = CutoffMode::count_reversed;
      break;
    case Variant::atpe_f:
      t.filter_menu[4] = t.filter_menu[5] = true;
      break;
    case Variant::atpe_cf:
      t.extended_atoms = true;
      break;
    case Variant::atpe_c:
      t.cutoff_mode = CutoffMode::count_reversed;
      t.categorical_blocking = true;
      break;
    case Variant::atpe_c_cf:
      t.cutoff_mode = CutoffMode::count_reversed;
      t.categorical_blocking = true;
      t.extended_atoms = true;
      break;
    case Variant::atpe_cf_zscore:
      t.extended_atoms = true;
      t.filter_menu[5] = true;
      break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Field layout
//
// Predicted fields in their fixed cascade order: categorical fields first,
// then reals. Categorical values travel as class indices.

enum class FieldKind { categorical, real };

struct ParamField {
  std::string_view name;
  FieldKind kind;
  std::size_t classes;  // categorical only
  double lower;         // real only
  double upper;
};

inline constexpr std::array<ParamField, 16> kParamFields{{
    {"filter_mode", FieldKind::categorical, filtering::kFilterModeCount, 0, 0},
    {"probability_mode", FieldKind::categorical, 2, 0, 0},
    {"value_mode", FieldKind::categorical, 2, 0, 0},
    {"random_probability", FieldKind::real, 0, 0.0, 1.0},
    {"age_multiplier", FieldKind::real, 0, 0.0, 2.0},
    {"loss_multiplier", FieldKind::real, 0, 0.0, 2.0},
    {"clusters_quantile", FieldKind::real, 0, 0.05, 1.0},
    {"zscore_threshold", FieldKind::real, 0, -3.0, 3.0},
    {"secondary_cutoff", FieldKind::real, 0, -1.0, 1.0},
    {"correlation_exponent", FieldKind::real, 0, 0.5, 3.0},
    {"fixed_probability", FieldKind::real, 0, 0.0, 1.0},
    {"correlation_multiplier", FieldKind::real, 0, 0.0, 5.0},
    {"elite_percentile", FieldKind::real, 0, 0.05, 1.0},
    {"anova_exponent", FieldKind::real, 0, 0.5, 3.0},
    {"cat_cutoff", FieldKind::real, 0, -1.0, 1.0},
    {"anova_multiplier", FieldKind::real, 0, 0.0, 5.0},
}};

inline constexpr std::size_t kFieldCount = kParamFields.size();

inline double get_field(const AtpeParams& p, std::size_t j) {
  switch (j) {
    case 0: return static_cast<double>(p.filter.mode);
    case 1: return static_cast<double>(p.blocking.probability_mode);
    case 2: return static_cast<double>(p.blocking.value_mode);
    case 3: return p.filter.random_probability;
    case 4: return p.filter.age_multiplier;
    case 5: return p.filter.loss_multiplier;
    case 6: return p.filter.clusters_quantile;
    case 7: return p.filter.zscore_threshold;
    case 8: return p.blocking.secondary_cutoff;
    case 9: return p.blocking.correlation_exponent;
    case 10: return p.blocking.fixed_probability;
    case 11: return p.blocking.correlation_multiplier;
    case 12: return p.blocking.elite_percentile;
    case 13: return p.blocking.anova_exponent;
    case 14: return p.blocking.cat_cutoff;
    case 15: return p.blocking.anova_multiplier;
  }
  throw std::out_of_range("param field index");
}

/// Stores a field, clipping reals to their range and categoricals to a valid class.
inline void set_field(AtpeParams& p, std::size_t j, double v) {
  const auto& f = kParamFields.at(j);
  if (f.kind == FieldKind::real) {
    v = std::clamp(v, f.lower, f.upper);
  } else {
    v = std::clamp(v, 0.0, static_cast<double>(f.classes - 1));
  }
  const auto cls = static_cast<int>(v);
  switch (j) {
    case 0: p.filter.mode = static_cast<filtering::FilterMode>(cls); break;
    case 1: p.blocking.probability_mode = static_cast<blocking::ProbabilityMode>(cls); break;
    case 2: p.blocking.value_mode = static_cast<blocking::ValueMode>(cls); break;
    case 3: p.filter.random_probability = v; break;
    case 4: p.filter.age_multiplier = v; break;
    case 5: p.filter.loss_multiplier = v; break;
    case 6: p.filter.clusters_quantile = v; break;
    case 7: p.filter.zscore_threshold = v; break;
    case 8: p.blocking.secondary_cutoff = v; break;
    case 9: p.blocking.correlation_exponent = v; break;
    case 10: p.blocking.fixed_probability = v; break;
    case 11: p.blocking.correlation_multiplier = v; break;
    case 12: p.blocking.elite_percentile = v; break;
    case 13: p.blocking.anova_exponent = v; break;
    case 14: p.blocking.cat_cutoff = v; break;
    case 15: p.blocking.anova_multiplier = v; break;
    default: throw std::out_of_range("param field index");
  }
}

/// True when every field is inside its declared range.
inline bool valid(const AtpeParams& p) {
  for (std::size_t j = 0; j < kFieldCount; ++j) {
    const auto& f = kParamFields[j];
    const double v = get_field(p, j);
    if (f.kind == FieldKind::real ? !(v >= f.lower && v <= f.upper) : !(v >= 0 && v < static_cast<double>(f.classes)))
      return false;
  }
  return p.tpe.gamma > 0.0 && p.tpe.gamma < 1.0 && p.tpe.n_ei_candidates > 0 && p.tpe.good_cap > 0;
}

/// Checksum of the predictor input layout: feature manifest plus cascade order.
inline std::uint64_t layout_checksum(const std::vector<std::string>& field_order) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& name : stats::feature_names()) h = fnv1a64(name + "\n", h);
  h = fnv1a64("--\n", h);
  for (const auto& name : field_order) h = fnv1a64(name + "\n", h);
  return h;
}

inline std::vector<std::string> field_order() {
  std::vector<std::string> out;
  for (const auto& f : kParamFields) out.emplace_back(f.name);
  return out;
}

inline std::uint64_t layout_checksum() { return layout_checksum(field_order()); }

/// Static defaults used when no trained model is available.
inline AtpeParams default_params(const VariantTraits& t) {
  AtpeParams p;
  p.filter.mode = filtering::FilterMode::loss;
  p.filter.random_probability = 0.0;
  p.filter.age_multiplier = 1.0;
  p.filter.loss_multiplier = 1.0;
  p.filter.clusters_quantile = 0.5;
  p.filter.zscore_threshold = 0.0;
  p.blocking.cutoff_mode = t.cutoff_mode;
  p.blocking.secondary_cutoff = 0.5;
  p.blocking.correlation_exponent = 2.0;
  p.blocking.probability_mode = blocking::ProbabilityMode::fixed;
  p.blocking.fixed_probability = 0.5;
  p.blocking.correlation_multiplier = 1.0;
  p.blocking.value_mode = blocking::ValueMode::elite;
  p.blocking.elite_percentile = 0.3;
  p.blocking.anova_exponent = 2.0;
  p.blocking.cat_cutoff = 0.5;
  p.blocking.anova_multiplier = 1.0;
  return p;
}

// ---------------------------------------------------------------------------
// Controllers

/// Source of AtpeParams for one iteration.
class ParamController {
 public:
  virtual ~ParamController() = default;
  virtual AtpeParams choose(const stats::StatisticsVector& stats, const VariantTraits& traits,
                            RngStream& rng) const = 0;
};

class DefaultController final : public ParamController {
 public:
  AtpeParams choose(const stats::StatisticsVector&, const VariantTraits& t, RngStream&) const override {
    return default_params(t);
  }
};

/// Every field drawn uniformly from its range; filter mode from the
/// variant's menu. Drives the exploratory runs that produce training data.
class RandomController final : public ParamController {
 public:
  AtpeParams choose(const stats::StatisticsVector&, const VariantTraits& t, RngStream& rng) const override {
    AtpeParams p = default_params(t);
    std::vector<std::size_t> menu;
    for (std::size_t m = 0; m < filtering::kFilterModeCount; ++m)
      if (t.filter_menu[m]) menu.push_back(m);
    set_field(p, 0, static_cast<double>(menu[rng.index(menu.size())]));
    for (std::size_t j = 1; j < kFieldCount; ++j) {
      const auto& f = kParamFields[j];
      if (f.kind == FieldKind::categorical) set_field(p, j, static_cast<double>(rng.index(f.classes)));
      else set_field(p, j, rng.uniform(f.lower, f.upper));
    }
    return p;
  }
};

}  // namespace atpe
