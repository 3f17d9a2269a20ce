#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "atpe/rng.hpp"

namespace atpe {

enum class ParamKind { continuous, integer, categorical };
enum class Scale { linear, log };

/// One dimension of a search space.
struct HyperparameterSpec {
  std::string name;
  ParamKind kind = ParamKind::continuous;
  double lower = 0.0;
  double upper = 1.0;
  Scale scale = Scale::linear;
  std::vector<std::string> choices;

  static HyperparameterSpec continuous(std::string name, double lower, double upper,
                                       Scale scale = Scale::linear) {
    return {std::move(name), ParamKind::continuous, lower, upper, scale, {}};
  }
  static HyperparameterSpec integer(std::string name, double lower, double upper) {
    return {std::move(name), ParamKind::integer, lower, upper, Scale::linear, {}};
  }
  static HyperparameterSpec categorical(std::string name, std::vector<std::string> choices) {
    return {std::move(name), ParamKind::categorical, 0.0, 0.0, Scale::linear, std::move(choices)};
  }

  bool is_categorical() const noexcept { return kind == ParamKind::categorical; }

  std::int64_t int_lower() const { return static_cast<std::int64_t>(std::ceil(lower)); }
  std::int64_t int_upper() const { return static_cast<std::int64_t>(std::floor(upper)); }
};

/// Categorical value, stored as an index into the spec's choices.
struct Choice {
  std::size_t index = 0;
  friend bool operator==(const Choice&, const Choice&) = default;
};

using ParamValue = std::variant<double, std::int64_t, Choice>;

/// A configuration: one value per dimension, in search-space order.
using Config = std::vector<ParamValue>;

class SearchSpace {
 public:
  SearchSpace() = default;

  explicit SearchSpace(std::vector<HyperparameterSpec> specs) : specs_(std::move(specs)) {
    if (specs_.empty()) throw std::invalid_argument("search space: no parameters");
    std::set<std::string> names;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      const auto& s = specs_[i];
      const std::string where = "params[" + std::to_string(i) + "]";
      if (s.name.empty()) throw std::invalid_argument(where + ".name: empty");
      if (!names.insert(s.name).second)
        throw std::invalid_argument(where + ".name: duplicate name '" + s.name + "'");
      switch (s.kind) {
        case ParamKind::continuous:
        case ParamKind::integer:
          if (!std::isfinite(s.lower) || !std::isfinite(s.upper) || !(s.lower < s.upper))
            throw std::invalid_argument(where + ".lower: must be finite and below upper");
          if (s.kind == ParamKind::continuous && s.scale == Scale::log && !(s.lower > 0.0))
            throw std::invalid_argument(where + ".lower: log scale requires lower > 0");
          if (s.kind == ParamKind::integer && s.int_lower() > s.int_upper())
            throw std::invalid_argument(where + ".lower: integer range is empty");
          break;
        case ParamKind::categorical: {
          std::set<std::string> labels(s.choices.begin(), s.choices.end());
          if (s.choices.size() < 2 || labels.size() != s.choices.size())
            throw std::invalid_argument(where + ".choices: need at least 2 distinct labels");
          break;
        }
      }
    }
  }

  std::size_t size() const noexcept { return specs_.size(); }
  const HyperparameterSpec& operator[](std::size_t i) const { return specs_[i]; }
  const std::vector<HyperparameterSpec>& specs() const noexcept { return specs_; }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < specs_.size(); ++i)
      if (specs_[i].name == name) return i;
    return std::nullopt;
  }

  /// Keeps only the listed dimensions, in the given order.
  SearchSpace subspace(const std::vector<std::size_t>& dims) const {
    std::vector<HyperparameterSpec> out;
    out.reserve(dims.size());
    for (auto d : dims) out.push_back(specs_.at(d));
    return SearchSpace(std::move(out));
  }

 private:
  std::vector<HyperparameterSpec> specs_;
};

// ---------------------------------------------------------------------------
// Value helpers

inline double as_real(const ParamValue& v) {
  if (auto p = std::get_if<double>(&v)) return *p;
  if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
  return static_cast<double>(std::get<Choice>(v).index);
}

inline bool in_domain(const HyperparameterSpec& s, const ParamValue& v) {
  switch (s.kind) {
    case ParamKind::continuous: {
      auto p = std::get_if<double>(&v);
      return p && std::isfinite(*p) && *p >= s.lower && *p <= s.upper;
    }
    case ParamKind::integer: {
      auto p = std::get_if<std::int64_t>(&v);
      return p && *p >= s.int_lower() && *p <= s.int_upper();
    }
    case ParamKind::categorical: {
      auto p = std::get_if<Choice>(&v);
      return p && p->index < s.choices.size();
    }
  }
  return false;
}

inline bool in_domain(const SearchSpace& space, const Config& config) {
  if (config.size() != space.size()) return false;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (!in_domain(space[i], config[i])) return false;
  return true;
}

/// Maps one value into [0, 1]. Log-scale dimensions are mapped in log domain.
inline double encode_value(const HyperparameterSpec& s, const ParamValue& v) {
  switch (s.kind) {
    case ParamKind::categorical:
      return static_cast<double>(std::get<Choice>(v).index) /
             static_cast<double>(s.choices.size() - 1);
    case ParamKind::continuous:
      if (s.scale == Scale::log) {
        const double lo = std::log(s.lower);
        return (std::log(std::get<double>(v)) - lo) / (std::log(s.upper) - lo);
      }
      return (std::get<double>(v) - s.lower) / (s.upper - s.lower);
    case ParamKind::integer:
      return (as_real(v) - s.lower) / (s.upper - s.lower);
  }
  return 0.0;
}

/// Inverse of encode_value; rounds integers and categoricals, clamps to the domain.
inline ParamValue decode_value(const HyperparameterSpec& s, double u) {
  u = std::clamp(u, 0.0, 1.0);
  switch (s.kind) {
    case ParamKind::categorical: {
      const auto k = s.choices.size();
      auto idx = static_cast<std::size_t>(std::llround(u * static_cast<double>(k - 1)));
      return Choice{std::min(idx, k - 1)};
    }
    case ParamKind::continuous: {
      double x = s.scale == Scale::log
                     ? std::exp(std::log(s.lower) + u * (std::log(s.upper) - std::log(s.lower)))
                     : s.lower + u * (s.upper - s.lower);
      return std::clamp(x, s.lower, s.upper);
    }
    case ParamKind::integer: {
      auto x = static_cast<std::int64_t>(std::llround(s.lower + u * (s.upper - s.lower)));
      return std::clamp(x, s.int_lower(), s.int_upper());
    }
  }
  return 0.0;
}

/// Numeric embedding of a configuration in [0,1]^d, following space order.
inline std::vector<double> encode_numeric(const Config& config, const SearchSpace& space) {
  std::vector<double> out(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) out[i] = encode_value(space[i], config[i]);
  return out;
}

/// Uniform prior draw (log-uniform for log-scale dimensions).
template <RandomSource Rng>
ParamValue sample_prior_value(const HyperparameterSpec& s, Rng& rng) {
  switch (s.kind) {
    case ParamKind::categorical:
      return Choice{rng.index(s.choices.size())};
    case ParamKind::integer: {
      const auto lo = s.int_lower();
      const auto span = static_cast<std::size_t>(s.int_upper() - lo + 1);
      return lo + static_cast<std::int64_t>(rng.index(span));
    }
    case ParamKind::continuous:
      return std::get<double>(decode_value(s, rng.uniform()));
  }
  return 0.0;
}

template <RandomSource Rng>
Config sample_prior(const SearchSpace& space, Rng& rng) {
  Config c;
  c.reserve(space.size());
  for (const auto& s : space.specs()) c.push_back(sample_prior_value(s, rng));
  return c;
}

// ---------------------------------------------------------------------------
// JSON

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::continuous: return "continuous";
    case ParamKind::integer: return "integer";
    case ParamKind::categorical: return "categorical";
  }
  return "?";
}

/// Parses `{"params":[{...}, ...]}`. Errors name the offending field.
inline SearchSpace space_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("params") || !doc["params"].is_array())
    throw std::invalid_argument("params: expected an array");
  std::vector<HyperparameterSpec> specs;
  const auto& params = doc["params"];
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const std::string where = "params[" + std::to_string(i) + "]";
    auto field = [&](const char* key) -> const nlohmann::json& {
      if (!p.contains(key)) throw std::invalid_argument(where + "." + key + ": missing");
      return p[key];
    };
    auto number = [&](const char* key) {
      const auto& v = field(key);
      if (!v.is_number()) throw std::invalid_argument(where + "." + key + ": expected a number");
      return v.get<double>();
    };
    if (!field("name").is_string()) throw std::invalid_argument(where + ".name: expected a string");
    if (!field("kind").is_string()) throw std::invalid_argument(where + ".kind: expected a string");
    HyperparameterSpec s;
    s.name = p["name"].get<std::string>();
    const auto kind = p["kind"].get<std::string>();
    if (kind == "continuous" || kind == "integer") {
      s.kind = kind == "continuous" ? ParamKind::continuous : ParamKind::integer;
      s.lower = number("lower");
      s.upper = number("upper");
      if (p.contains("scale")) {
        const auto& sc = p["scale"];
        if (sc == "linear") s.scale = Scale::linear;
        else if (sc == "log" && s.kind == ParamKind::continuous) s.scale = Scale::log;
        else throw std::invalid_argument(where + ".scale: expected \"linear\" or \"log\"");
      }
    } else if (kind == "categorical") {
      s.kind = ParamKind::categorical;
      const auto& ch = field("choices");
      if (!ch.is_array()) throw std::invalid_argument(where + ".choices: expected an array");
      for (const auto& c : ch) {
        if (!c.is_string()) throw std::invalid_argument(where + ".choices: expected strings");
        s.choices.push_back(c.get<std::string>());
      }
    } else {
      throw std::invalid_argument(where + ".kind: unknown kind '" + kind + "'");
    }
    specs.push_back(std::move(s));
  }
  return SearchSpace(std::move(specs));
}

inline nlohmann::json space_to_json(const SearchSpace& space) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& s : space.specs()) {
    nlohmann::json p{{"name", s.name}, {"kind", to_string(s.kind)}};
    if (s.is_categorical()) {
      p["choices"] = s.choices;
    } else {
      p["lower"] = s.lower;
      p["upper"] = s.upper;
      if (s.kind == ParamKind::continuous) p["scale"] = s.scale == Scale::log ? "log" : "linear";
    }
    params.push_back(std::move(p));
  }
  return {{"params", params}};
}

inline nlohmann::json config_to_json(const Config& config, const SearchSpace& space) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& s = space[i];
    const auto& v = config.at(i);
    if (auto c = std::get_if<Choice>(&v)) out[s.name] = s.choices.at(c->index);
    else if (auto n = std::get_if<std::int64_t>(&v)) out[s.name] = *n;
    else out[s.name] = std::get<double>(v);
  }
  return out;
}

}  // namespace atpe
