#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "atpe/blocking.hpp"
#include "atpe/history.hpp"
#include "atpe/kmeans.hpp"
#include "atpe/rng.hpp"
#include "atpe/statistics.hpp"

// Cheap synthetic objectives on the unit hypercube, built as weighted sums
// of unary and binary atoms. Used to train the parameter predictor.

namespace atpe::surrogate {

enum class AtomKind {
  linear,
  quadratic,
  gaussian_peak,
  sine_wave,
  sigmoid,
  gaussian_product,
  sine_product,
  hyperbolic_product,
};

inline constexpr std::array<AtomKind, 8> kAllKinds{
    AtomKind::linear,     AtomKind::quadratic,        AtomKind::gaussian_peak, AtomKind::sine_wave,
    AtomKind::sigmoid,    AtomKind::gaussian_product, AtomKind::sine_product,  AtomKind::hyperbolic_product};

inline constexpr std::string_view to_string(AtomKind k) {
  switch (k) {
    case AtomKind::linear: return "linear";
    case AtomKind::quadratic: return "quadratic";
    case AtomKind::gaussian_peak: return "gaussian_peak";
    case AtomKind::sine_wave: return "sine_wave";
    case AtomKind::sigmoid: return "sigmoid";
    case AtomKind::gaussian_product: return "gaussian_product";
    case AtomKind::sine_product: return "sine_product";
    case AtomKind::hyperbolic_product: return "hyperbolic_product";
  }
  return "?";
}

inline AtomKind atom_kind_from_string(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown atom kind '" + std::string(s) + "'");
}

inline constexpr std::size_t arity(AtomKind k) {
  return k == AtomKind::gaussian_product || k == AtomKind::sine_product || k == AtomKind::hyperbolic_product
             ? 2
             : 1;
}

using AtomPool = std::set<AtomKind>;

/// Atoms available to the baseline generator.
inline AtomPool base_pool() {
  return {AtomKind::linear,    AtomKind::quadratic,        AtomKind::gaussian_peak,
          AtomKind::sine_wave, AtomKind::gaussian_product, AtomKind::sine_product};
}

/// Baseline atoms plus the sigmoid and hyperbolic product.
inline AtomPool extended_pool() {
  auto p = base_pool();
  p.insert(AtomKind::sigmoid);
  p.insert(AtomKind::hyperbolic_product);
  return p;
}

struct SurrogateAtom {
  AtomKind kind = AtomKind::linear;
  std::array<std::size_t, 2> dims{0, 0};
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double weight = 1.0;

  friend bool operator==(const SurrogateAtom&, const SurrogateAtom&) = default;
};

/// Value of one atom (unweighted) at a point of the unit hypercube.
inline double evaluate_atom(const SurrogateAtom& atom, std::span<const double> h) {
  const double x = h[atom.dims[0]];
  const double a = atom.a, b = atom.b, c = atom.c;
  switch (atom.kind) {
    case AtomKind::linear: return a * (x - b);
    case AtomKind::quadratic: return a * (x - b) * (x - b);
    case AtomKind::gaussian_peak: return std::exp(-a * (x - b) * (x - b));
    case AtomKind::sine_wave: return std::sin(a * x + b);
    case AtomKind::sigmoid: return 1.0 / (1.0 + std::exp(-a * (x - b)));
    case AtomKind::gaussian_product: {
      const double y = h[atom.dims[1]];
      return std::exp(-a * (x - b) * (x - b)) * std::exp(-a * (y - c) * (y - c));
    }
    case AtomKind::sine_product: return std::sin(a * x) * std::sin(b * h[atom.dims[1]]);
    case AtomKind::hyperbolic_product: {
      const double y = h[atom.dims[1]];
      return std::sinh(a * x) * std::sinh(b * y) / (c + std::cosh(x * y));
    }
  }
  return 0.0;
}

struct SurrogateFunction {
  std::size_t dims = 1;
  std::vector<SurrogateAtom> atoms;

  friend bool operator==(const SurrogateFunction&, const SurrogateFunction&) = default;
};

inline double evaluate_surrogate(const SurrogateFunction& f, std::span<const double> point) {
  double s = 0.0;
  for (const auto& atom : f.atoms) s += atom.weight * evaluate_atom(atom, point);
  return s;
}

/// One unary atom per dimension plus floor(dims/2) binary atoms over
/// distinct random pairs. Binary atoms are skipped if the pool has none.
template <RandomSource Rng>
SurrogateFunction generate_surrogate(std::size_t dims, const AtomPool& pool, Rng& rng) {
  if (dims == 0) throw std::invalid_argument("surrogate: dims must be >= 1");
  std::vector<AtomKind> unary, binary;
  for (auto k : pool) (arity(k) == 1 ? unary : binary).push_back(k);
  if (unary.empty()) throw std::invalid_argument("surrogate: atom pool has no unary kinds");

  SurrogateFunction f;
  f.dims = dims;
  for (std::size_t d = 0; d < dims; ++d) {
    SurrogateAtom atom;
    atom.kind = unary[rng.index(unary.size())];
    atom.dims = {d, d};
    atom.a = rng.uniform(1.0, 20.0);
    atom.b = rng.uniform(0.0, 1.0);
    atom.weight = rng.uniform(0.5, 2.0);
    f.atoms.push_back(atom);
  }
  if (binary.empty() || dims < 2) return f;

  std::set<std::pair<std::size_t, std::size_t>> used;
  const std::size_t max_pairs = dims * (dims - 1) / 2;
  for (std::size_t p = 0; p < dims / 2 && used.size() < max_pairs; ++p) {
    std::size_t i, j;
    do {
      i = rng.index(dims);
      j = rng.index(dims - 1);
      if (j >= i) ++j;
    } while (used.contains({std::min(i, j), std::max(i, j)}));
    used.insert({std::min(i, j), std::max(i, j)});
    SurrogateAtom atom;
    atom.kind = binary[rng.index(binary.size())];
    atom.dims = {i, j};
    atom.a = rng.uniform(0.5, 3.0);
    atom.b = rng.uniform(0.5, 3.0);
    atom.c = rng.uniform(0.0, 2.0);
    atom.weight = rng.uniform(0.5, 2.0);
    f.atoms.push_back(atom);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Corpus profiling and clustering

/// Statistics profile of a function after `budget` uniform random probes.
template <RandomSource Rng>
stats::StatisticsVector profile(const SurrogateFunction& f, std::size_t budget, Rng& rng) {
  std::vector<HyperparameterSpec> specs;
  for (std::size_t d = 0; d < f.dims; ++d) specs.push_back(HyperparameterSpec::continuous("h" + std::to_string(d), 0, 1));
  const SearchSpace space(std::move(specs));
  History h;
  std::vector<double> point(f.dims);
  for (std::size_t i = 0; i < budget; ++i) {
    Config c;
    for (std::size_t d = 0; d < f.dims; ++d) {
      point[d] = rng.uniform();
      c.push_back(point[d]);
    }
    h.append(std::move(c), evaluate_surrogate(f, point));
  }
  return stats::compute_statistics(h, blocking::correlation_report(h, space, 1.0));
}

inline constexpr std::size_t kClusterRestarts = 10;

/// Indices of cluster representatives. Profiles are standardised per
/// feature before k-means (best of several seedings by inertia); one random
/// member per non-empty cluster.
template <RandomSource Rng>
std::vector<std::size_t> cluster_corpus(const std::vector<SurrogateFunction>& functions, std::size_t k,
                                        std::size_t probe_budget, Rng& rng) {
  if (k == 0 || functions.size() < k) throw std::invalid_argument("cluster_corpus: need |functions| >= k >= 1");
  std::vector<std::vector<double>> points;
  points.reserve(functions.size());
  for (std::size_t i = 0; i < functions.size(); ++i) {
    auto probe_rng = rng.child(i);
    const auto s = profile(functions[i], probe_budget, probe_rng);
    points.emplace_back(s.begin(), s.end());
  }
  const std::size_t dim = stats::kFeatureCount;
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0, var = 0.0;
    for (const auto& p : points) mean += p[j];
    mean /= static_cast<double>(points.size());
    for (const auto& p : points) var += (p[j] - mean) * (p[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(points.size()));
    // Features constant up to rounding carry no information.
    const bool flat = sd <= 1e-9 * std::max(1.0, std::abs(mean));
    for (auto& p : points) p[j] = flat ? 0.0 : (p[j] - mean) / sd;
  }
  auto result = kmeans(points, k, rng);
  double best = result.inertia(points);
  for (std::size_t r = 1; r < kClusterRestarts; ++r) {
    auto candidate = kmeans(points, k, rng);
    if (const double in = candidate.inertia(points); in < best) {
      best = in;
      result = std::move(candidate);
    }
  }
  std::vector<std::size_t> reps;
  for (const auto& members : result.clusters()) reps.push_back(members[rng.index(members.size())]);
  std::sort(reps.begin(), reps.end());
  return reps;
}

// ---------------------------------------------------------------------------
// JSON lines corpus

inline nlohmann::json to_json(const SurrogateFunction& f) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : f.atoms) {
    nlohmann::json dims = arity(a.kind) == 1 ? nlohmann::json::array({a.dims[0]})
                                             : nlohmann::json::array({a.dims[0], a.dims[1]});
    atoms.push_back({{"kind", to_string(a.kind)}, {"dims", dims}, {"a", a.a}, {"b", a.b}, {"c", a.c},
                     {"weight", a.weight}});
  }
  return {{"dims", f.dims}, {"atoms", atoms}};
}

inline SurrogateFunction from_json(const nlohmann::json& j) {
  SurrogateFunction f;
  f.dims = j.at("dims").get<std::size_t>();
  if (f.dims == 0) throw std::invalid_argument("surrogate: dims must be >= 1");
  for (const auto& a : j.at("atoms")) {
    SurrogateAtom atom;
    atom.kind = atom_kind_from_string(a.at("kind").get<std::string>());
    const auto& dims = a.at("dims");
    if (dims.size() != arity(atom.kind)) throw std::invalid_argument("surrogate: atom arity mismatch");
    atom.dims[0] = dims[0].get<std::size_t>();
    atom.dims[1] = arity(atom.kind) == 2 ? dims[1].get<std::size_t>() : atom.dims[0];
    if (atom.dims[0] >= f.dims || atom.dims[1] >= f.dims)
      throw std::invalid_argument("surrogate: atom dimension out of range");
    atom.a = a.at("a").get<double>();
    atom.b = a.at("b").get<double>();
    atom.c = a.at("c").get<double>();
    atom.weight = a.at("weight").get<double>();
    if (atom.kind == AtomKind::hyperbolic_product && !(atom.c > -1.0))
      throw std::invalid_argument("surrogate: hyperbolic_product requires c > -1");
    f.atoms.push_back(atom);
  }
  return f;
}

inline void write_corpus(std::ostream& out, const std::vector<SurrogateFunction>& corpus) {
  for (const auto& f : corpus) out << to_json(f).dump() << '\n';
}

inline std::vector<SurrogateFunction> read_corpus(std::istream& in) {
  std::vector<SurrogateFunction> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

/// Corpus of `count` functions with dimensionality drawn from [1, max_dims].
template <RandomSource Rng>
std::vector<SurrogateFunction> generate_corpus(std::size_t count, std::size_t max_dims, const AtomPool& pool,
                                               Rng& rng) {
  std::vector<SurrogateFunction> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_surrogate(1 + rng.index(max_dims), pool, rng));
  return out;
}

}  // namespace atpe::surrogate
