#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "atpe/benchmarks.hpp"
#include "atpe/parallel.hpp"
#include "atpe/params.hpp"
#include "atpe/rng.hpp"
#include "atpe/session.hpp"

// Experiment runner: rounds x steps of ask/tell per (benchmark, variant),
// aggregated into CSV tables and SVG plots.

namespace atpe::harness {

struct ExperimentConfig {
  std::vector<std::string> benchmarks;
  std::vector<Variant> variants;
  std::size_t rounds = 50;
  std::size_t steps = 200;
  std::uint64_t seed = 42;
  /// Controller per adaptive variant; missing entries use `default_model`
  /// and then the static-defaults controller.
  std::map<Variant, std::shared_ptr<const ParamController>> models;
  std::shared_ptr<const ParamController> default_model;
  std::size_t threads = 1;
};

struct RoundResult {
  double final_loss = 0.0;
  std::vector<double> trace;  // incumbent after each step
  std::array<std::size_t, filtering::kFilterModeCount> filter_counts{};
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for one round
  double best = 0.0;
};

struct CellResult {
  std::string benchmark;
  Variant variant = Variant::tpe;
  std::vector<RoundResult> rounds;

  std::vector<double> losses() const {
    std::vector<double> out;
    for (const auto& r : rounds) out.push_back(r.final_loss);
    return out;
  }
};

struct ExperimentResult {
  std::vector<CellResult> cells;
};

inline Summary summarize_losses(std::vector<double> v) {
  Summary s;
  if (v.empty()) return s;
  const double n = static_cast<double>(v.size());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.best = v.front();
  return s;
}

/// Filter-mode frequencies over all adaptive decisions of a cell; all zero
/// when no decision was made (plain TPE, or runs shorter than warm-up).
inline std::array<double, filtering::kFilterModeCount> filter_frequencies(const CellResult& cell) {
  std::array<double, filtering::kFilterModeCount> f{};
  double total = 0.0;
  for (const auto& r : cell.rounds)
    for (std::size_t m = 0; m < f.size(); ++m) {
      f[m] += static_cast<double>(r.filter_counts[m]);
      total += static_cast<double>(r.filter_counts[m]);
    }
  if (total > 0.0)
    for (auto& x : f) x /= total;
  return f;
}

/// Seed of one round; depends only on its own coordinates.
inline std::uint64_t round_seed(std::uint64_t base, std::string_view benchmark, Variant variant, std::size_t round) {
  std::uint64_t h = hash_combine(splitmix64(base), fnv1a64(benchmark));
  h = hash_combine(h, fnv1a64(to_string(variant)));
  return hash_combine(h, round);
}

inline RoundResult run_round(const bench::Benchmark& b, Variant variant, std::uint64_t seed, std::size_t steps,
                             std::shared_ptr<const ParamController> controller) {
  OptimizerSession session(b.space(), variant, seed, std::move(controller));
  RoundResult r;
  r.trace.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto config = session.ask();
    if (session.last_decision().adaptive)
      ++r.filter_counts[static_cast<std::size_t>(session.last_decision().params.filter.mode)];
    session.tell(config, b.evaluate(config));
    r.trace.push_back(session.incumbent()->loss);
  }
  r.final_loss = r.trace.empty() ? 0.0 : r.trace.back();
  return r;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.rounds < 1 || cfg.steps < 1) throw std::invalid_argument("experiment: rounds and steps must be >= 1");
  for (const auto& name : cfg.benchmarks) bench::get(name);

  ExperimentResult result;
  for (const auto& name : cfg.benchmarks)
    for (auto v : cfg.variants) result.cells.push_back({name, v, std::vector<RoundResult>(cfg.rounds)});

  const std::size_t total = result.cells.size() * cfg.rounds;
  parallel_for(total, cfg.threads, [&](std::size_t task) {
    auto& cell = result.cells[task / cfg.rounds];
    const std::size_t round = task % cfg.rounds;
    std::shared_ptr<const ParamController> controller = cfg.default_model;
    if (auto it = cfg.models.find(cell.variant); it != cfg.models.end()) controller = it->second;
    cell.rounds[round] = run_round(bench::get(cell.benchmark), cell.variant,
                                   round_seed(cfg.seed, cell.benchmark, cell.variant, round), cfg.steps, controller);
  });
  return result;
}

// ---------------------------------------------------------------------------
// Output

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::filesystem::path prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
  return dir;
}

inline std::string summary_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "benchmark,variant,mean,median,std,best\n";
  for (const auto& c : r.cells) {
    const auto s = summarize_losses(c.losses());
    out << c.benchmark << ',' << to_string(c.variant) << ',' << fmt_double(s.mean) << ',' << fmt_double(s.median)
        << ',' << fmt_double(s.std) << ',' << fmt_double(s.best) << '\n';
  }
  return out.str();
}

inline std::string traces_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "benchmark,variant,round,step,incumbent\n";
  for (const auto& c : r.cells)
    for (std::size_t i = 0; i < c.rounds.size(); ++i)
      for (std::size_t s = 0; s < c.rounds[i].trace.size(); ++s)
        out << c.benchmark << ',' << to_string(c.variant) << ',' << i << ',' << s + 1 << ','
            << fmt_double(c.rounds[i].trace[s]) << '\n';
  return out.str();
}

inline std::string filters_csv(const ExperimentResult& r) {
  std::ostringstream out;
  out << "variant,benchmark,mode,frequency\n";
  for (const auto& c : r.cells) {
    const auto f = filter_frequencies(c);
    if (std::accumulate(f.begin(), f.end(), 0.0) == 0.0) continue;
    for (std::size_t m = 0; m < f.size(); ++m)
      out << to_string(c.variant) << ',' << c.benchmark << ','
          << filtering::to_string(static_cast<filtering::FilterMode>(m)) << ',' << fmt_double(f[m]) << '\n';
  }
  return out.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// CSV reading and SVG plots

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    rows.push_back(std::move(cols));
  }
  return rows;
}

namespace detail {

inline constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                     "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace detail

/// Median incumbent per step, one line per variant.
inline std::string convergence_svg(const std::string& benchmark,
                                   const std::map<std::string, std::vector<double>>& median_by_variant) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t steps = 1;
  for (const auto& [v, m] : median_by_variant) {
    // Skip the first 10% so the warm-up transient does not flatten the plot.
    for (std::size_t i = m.size() / 10; i < m.size(); ++i) {
      lo = std::min(lo, m[i]);
      hi = std::max(hi, m[i]);
    }
    steps = std::max(steps, m.size());
  }
  if (!(hi > lo)) {
    hi = lo + 1.0;
  }
  auto x = [&](std::size_t s) { return L + (W - L - R) * static_cast<double>(s) / static_cast<double>(std::max<std::size_t>(steps - 1, 1)); };
  auto y = [&](double v) { return T + (H - T - B) * (1.0 - (std::clamp(v, lo, hi) - lo) / (hi - lo)); };
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << L << "\" y=\"24\" font-size=\"16\">" << detail::svg_escape(benchmark)
      << ": median incumbent</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << L - 5 << "\" y=\"" << T + 5 << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_double(hi).substr(0, 8) << "</text>\n";
  out << "<text x=\"" << L - 5 << "\" y=\"" << H - B << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_double(lo).substr(0, 8) << "</text>\n";
  out << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 15 << "\" font-size=\"12\" text-anchor=\"middle\">step (1.." << steps << ")</text>\n";
  std::size_t k = 0;
  for (const auto& [v, m] : median_by_variant) {
    const char* color = detail::kPalette[k % detail::kPalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < m.size(); ++i) out << x(i) << ',' << y(m[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * static_cast<double>(k) << "\" font-size=\"12\" fill=\""
        << color << "\">" << detail::svg_escape(v) << "</text>\n";
    ++k;
  }
  out << "</svg>\n";
  return out.str();
}

/// Grouped bars of filter-mode frequency per benchmark for one variant.
inline std::string filters_svg(const std::string& variant,
                               const std::map<std::string, std::map<std::string, double>>& freq_by_benchmark) {
  constexpr double W = 720, H = 360, L = 50, T = 40, B = 60;
  const double group = (W - L - 20) / static_cast<double>(std::max<std::size_t>(freq_by_benchmark.size(), 1));
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << L << "\" y=\"24\" font-size=\"16\">" << detail::svg_escape(variant)
      << ": filter mode frequency</text>\n";
  std::size_t gi = 0;
  for (const auto& [benchmark, modes] : freq_by_benchmark) {
    const double bar = group * 0.8 / static_cast<double>(filtering::kFilterModeCount);
    for (std::size_t m = 0; m < filtering::kFilterModeCount; ++m) {
      const auto name = std::string(filtering::to_string(static_cast<filtering::FilterMode>(m)));
      const auto it = modes.find(name);
      const double f = it == modes.end() ? 0.0 : it->second;
      const double h = (H - T - B) * f;
      out << "<rect x=\"" << L + group * static_cast<double>(gi) + bar * static_cast<double>(m) << "\" y=\""
          << H - B - h << "\" width=\"" << bar << "\" height=\"" << h << "\" fill=\"" << detail::kPalette[m] << "\"/>\n";
    }
    out << "<text x=\"" << L + group * (static_cast<double>(gi) + 0.4) << "\" y=\"" << H - B + 15
        << "\" font-size=\"10\" text-anchor=\"middle\">" << detail::svg_escape(benchmark) << "</text>\n";
    ++gi;
  }
  for (std::size_t m = 0; m < filtering::kFilterModeCount; ++m)
    out << "<text x=\"" << L + 90 * static_cast<double>(m) << "\" y=\"" << H - 15 << "\" font-size=\"11\" fill=\""
        << detail::kPalette[m] << "\">" << filtering::to_string(static_cast<filtering::FilterMode>(m)) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

/// Reads traces.csv / filters.csv from `dir` and writes SVG plots next to
/// them. Returns the files written.
inline std::vector<std::filesystem::path> write_plots(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  // benchmark -> variant -> step -> incumbents across rounds
  std::map<std::string, std::map<std::string, std::vector<std::vector<double>>>> traces;
  for (const auto& row : read_csv(dir / "traces.csv")) {
    if (row.size() != 5) throw std::runtime_error("traces.csv: malformed row");
    auto& steps = traces[row[0]][row[1]];
    const auto step = static_cast<std::size_t>(std::stoul(row[3]));
    if (steps.size() < step) steps.resize(step);
    steps[step - 1].push_back(std::stod(row[4]));
  }
  for (const auto& [benchmark, variants] : traces) {
    std::map<std::string, std::vector<double>> medians;
    for (const auto& [variant, steps] : variants)
      for (const auto& values : steps) medians[variant].push_back(summarize_losses(values).median);
    const auto path = dir / ("convergence_" + benchmark + ".svg");
    write_file(path, convergence_svg(benchmark, medians));
    written.push_back(path);
  }
  if (std::filesystem::exists(dir / "filters.csv")) {
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> freq;
    for (const auto& row : read_csv(dir / "filters.csv")) {
      if (row.size() != 4) throw std::runtime_error("filters.csv: malformed row");
      freq[row[0]][row[1]][row[2]] = std::stod(row[3]);
    }
    for (const auto& [variant, by_benchmark] : freq) {
      const auto path = dir / ("filters_" + variant + ".svg");
      write_file(path, filters_svg(variant, by_benchmark));
      written.push_back(path);
    }
  }
  return written;
}

/// Writes summary.csv, traces.csv and filters.csv (plus plots if asked).
inline void summarize(const ExperimentResult& r, const std::filesystem::path& dir, bool plots = false) {
  prepare_output_dir(dir);
  write_file(dir / "summary.csv", summary_csv(r));
  write_file(dir / "traces.csv", traces_csv(r));
  write_file(dir / "filters.csv", filters_csv(r));
  if (plots) write_plots(dir);
}

}  // namespace atpe::harness
