#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atpe/space.hpp"

// The nine classic black-box test functions, standard forms and domains.

namespace atpe::bench {

namespace fn {

using std::numbers::pi;

inline double bohachevsky(std::span<const double> x) {
  return x[0] * x[0] + 2.0 * x[1] * x[1] - 0.3 * std::cos(3.0 * pi * x[0]) - 0.4 * std::cos(4.0 * pi * x[1]) + 0.7;
}

inline double branin(std::span<const double> x) {
  constexpr double a = 1.0, r = 6.0, s = 10.0;
  const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
  const double q = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * q * q + s * (1.0 - t) * std::cos(x[0]) + s;
}

/// Six-hump camelback.
inline double camelback(std::span<const double> x) {
  const double x2 = x[0] * x[0], y2 = x[1] * x[1];
  return (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2 + x[0] * x[1] + (-4.0 + 4.0 * y2) * y2;
}

inline double forrester(std::span<const double> x) {
  const double u = 6.0 * x[0] - 2.0;
  return u * u * std::sin(12.0 * x[0] - 4.0);
}

inline double goldstein_price(std::span<const double> x) {
  const double a = x[0], b = x[1];
  const double s = a + b + 1.0;
  const double t1 = 1.0 + s * s * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
  const double d = 2.0 * a - 3.0 * b;
  const double t2 = 30.0 + d * d * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
  return t1 * t2;
}

inline constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};

inline double hartmann3(std::span<const double> x) {
  static constexpr double A[4][3] = {{3.0, 10, 30}, {0.1, 10, 35}, {3.0, 10, 30}, {0.1, 10, 35}};
  static constexpr double P[4][3] = {
      {0.3689, 0.1170, 0.2673}, {0.4699, 0.4387, 0.7470}, {0.1091, 0.8732, 0.5547}, {0.0381, 0.5743, 0.8828}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 3; ++j) inner += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -s;
}

inline double hartmann6(std::span<const double> x) {
  static constexpr double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                     {0.05, 10, 17, 0.1, 8, 14},
                                     {3, 3.5, 1.7, 10, 17, 8},
                                     {17, 8, 0.05, 10, 0.1, 14}};
  static constexpr double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                     {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                     {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                     {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) inner += A[i][j] * (x[j] - P[i][j]) * (x[j] - P[i][j]);
    s += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -s;
}

inline double levy(std::span<const double> x) {
  const std::size_t d = x.size();
  auto w = [&](std::size_t i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  const double s0 = std::sin(pi * w(0));
  double s = s0 * s0;
  for (std::size_t i = 0; i + 1 < d; ++i) {
    const double wi = w(i);
    const double si = std::sin(pi * wi + 1.0);
    s += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * si * si);
  }
  const double wd = w(d - 1);
  const double sd = std::sin(2.0 * pi * wd);
  return s + (wd - 1.0) * (wd - 1.0) * (1.0 + sd * sd);
}

inline double rosenbrock(std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = 1.0 - x[i];
    const double b = x[i + 1] - x[i] * x[i];
    s += a * a + 100.0 * b * b;
  }
  return s;
}

}  // namespace fn

struct Benchmark {
  std::string_view name;
  std::size_t dims;
  std::vector<std::pair<double, double>> domain;
  double (*function)(std::span<const double>);
  /// Known global minimum, when one is documented.
  std::optional<double> analytic_minimum;

  double evaluate(std::span<const double> x) const {
    if (x.size() != dims) throw std::invalid_argument(std::string(name) + ": wrong dimensionality");
    for (std::size_t i = 0; i < dims; ++i)
      if (!(x[i] >= domain[i].first && x[i] <= domain[i].second))
        throw std::domain_error(std::string(name) + ": point outside the domain");
    return function(x);
  }

  SearchSpace space() const {
    std::vector<HyperparameterSpec> specs;
    for (std::size_t i = 0; i < dims; ++i)
      specs.push_back(HyperparameterSpec::continuous("x" + std::to_string(i), domain[i].first, domain[i].second));
    return SearchSpace(std::move(specs));
  }

  double evaluate(const Config& c) const {
    std::vector<double> x(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) x[i] = as_real(c[i]);
    return evaluate(x);
  }
};

inline const std::vector<Benchmark>& registry() {
  static const std::vector<Benchmark> all = [] {
    auto box = [](std::size_t d, double lo, double hi) { return std::vector<std::pair<double, double>>(d, {lo, hi}); };
    return std::vector<Benchmark>{
        {"Bohachevsky", 2, box(2, -100, 100), &fn::bohachevsky, 0.0},
        {"Branin", 2, {{-5, 10}, {0, 15}}, &fn::branin, 0.39788735772973816},
        {"Camelback", 2, {{-3, 3}, {-2, 2}}, &fn::camelback, -1.0316284534898774},
        {"Forrester", 1, box(1, 0, 1), &fn::forrester, std::nullopt},
        {"GoldsteinPrice", 2, box(2, -2, 2), &fn::goldstein_price, 3.0},
        {"Hartmann3", 3, box(3, 0, 1), &fn::hartmann3, -3.8627797869493365},
        {"Hartmann6", 6, box(6, 0, 1), &fn::hartmann6, -3.3223680114155147},
        {"Levy", 2, box(2, -10, 10), &fn::levy, 0.0},
        {"Rosenbrock", 2, box(2, -5, 10), &fn::rosenbrock, 0.0},
    };
  }();
  return all;
}

inline std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& b : registry()) out.emplace_back(b.name);
  return out;
}

inline const Benchmark& get(std::string_view name) {
  for (const auto& b : registry())
    if (b.name == name) return b;
  std::string valid;
  for (const auto& b : registry()) valid += (valid.empty() ? "" : ", ") + std::string(b.name);
  throw std::invalid_argument("unknown benchmark '" + std::string(name) + "' (valid: " + valid + ")");
}

inline double evaluate(std::string_view name, std::span<const double> point) { return get(name).evaluate(point); }

// ---------------------------------------------------------------------------
// Dense-sample oracle

/// Sobol sequence in up to 6 dimensions (Joe-Kuo direction numbers).
class Sobol {
 public:
  static constexpr std::size_t kMaxDims = 6;
  static constexpr int kBits = 32;

  explicit Sobol(std::size_t dims) : dims_(dims), x_(dims, 0) {
    if (dims == 0 || dims > kMaxDims) throw std::invalid_argument("sobol: supports 1..6 dimensions");
    struct Poly {
      unsigned s, a;
      std::array<std::uint32_t, 4> m;
    };
    static constexpr std::array<Poly, kMaxDims - 1> polys{{
        {1, 0, {1, 0, 0, 0}},
        {2, 1, {1, 3, 0, 0}},
        {3, 1, {1, 3, 1, 0}},
        {3, 2, {1, 1, 1, 0}},
        {4, 1, {1, 1, 3, 3}},
    }};
    v_.assign(dims, std::array<std::uint32_t, kBits>{});
    for (int i = 0; i < kBits; ++i) v_[0][static_cast<std::size_t>(i)] = 1u << (31 - i);
    for (std::size_t d = 1; d < dims; ++d) {
      const auto& p = polys[d - 1];
      auto& v = v_[d];
      for (unsigned i = 0; i < p.s; ++i) v[i] = p.m[i] << (31 - i);
      for (unsigned i = p.s; i < static_cast<unsigned>(kBits); ++i) {
        v[i] = v[i - p.s] ^ (v[i - p.s] >> p.s);
        for (unsigned k = 1; k < p.s; ++k)
          if ((p.a >> (p.s - 1 - k)) & 1u) v[i] ^= v[i - k];
      }
    }
  }

  /// Next point in [0, 1)^dims (the first call returns the origin).
  std::vector<double> next() {
    std::vector<double> out(dims_);
    for (std::size_t d = 0; d < dims_; ++d) out[d] = static_cast<double>(x_[d]) * 0x1.0p-32;
    unsigned c = 0;
    for (std::uint64_t i = index_; i & 1u; i >>= 1) ++c;
    for (std::size_t d = 0; d < dims_; ++d) x_[d] ^= v_[d][c];
    ++index_;
    return out;
  }

 private:
  std::size_t dims_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> x_;
  std::vector<std::array<std::uint32_t, kBits>> v_;
};

/// Minimum over `samples` Sobol points, refined by bounded compass search
/// from the best few points.
inline double dense_minimum(const Benchmark& b, std::size_t samples = 1'000'000) {
  Sobol sobol(b.dims);
  std::vector<std::pair<double, std::vector<double>>> best;
  constexpr std::size_t kKeep = 8;
  std::vector<double> x(b.dims);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto u = sobol.next();
    for (std::size_t d = 0; d < b.dims; ++d) x[d] = b.domain[d].first + u[d] * (b.domain[d].second - b.domain[d].first);
    const double f = b.function(x);
    if (best.size() < kKeep || f < best.back().first) {
      best.emplace_back(f, x);
      std::sort(best.begin(), best.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
      if (best.size() > kKeep) best.pop_back();
    }
  }
  double overall = best.front().first;
  for (auto& [f, p] : best) {
    std::vector<double> step(b.dims);
    for (std::size_t d = 0; d < b.dims; ++d) step[d] = 0.01 * (b.domain[d].second - b.domain[d].first);
    double cur = f;
    for (int iter = 0; iter < 100000; ++iter) {
      bool improved = false;
      for (std::size_t d = 0; d < b.dims; ++d) {
        for (double dir : {1.0, -1.0}) {
          auto q = p;
          q[d] = std::clamp(q[d] + dir * step[d], b.domain[d].first, b.domain[d].second);
          const double fq = b.function(q);
          if (fq < cur) {
            cur = fq;
            p = std::move(q);
            improved = true;
          }
        }
      }
      if (!improved) {
        bool tiny = true;
        for (std::size_t d = 0; d < b.dims; ++d) {
          step[d] *= 0.5;
          if (step[d] > 1e-12 * (b.domain[d].second - b.domain[d].first)) tiny = false;
        }
        if (tiny) break;
      }
    }
    overall = std::min(overall, cur);
  }
  return overall;
}

struct ReferenceMinimum {
  double loss;
  double tolerance;
};

/// Dense-sample oracle minimum, computed once per benchmark and cached.
inline ReferenceMinimum reference_minimum(std::string_view name) {
  static std::mutex mutex;
  static std::map<std::string, double, std::less<>> cache;
  const auto& b = get(name);
  std::lock_guard lock(mutex);
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(std::string(name), dense_minimum(b)).first;
  return {it->second, 1e-2};
}

}  // namespace atpe::bench
