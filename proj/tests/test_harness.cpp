#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "atpe/harness.hpp"

using namespace atpe;
using namespace atpe::harness;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.benchmarks = {"Forrester", "Branin"};
  cfg.variants = {Variant::tpe, Variant::atpe, Variant::atpe_f};
  cfg.rounds = 3;
  cfg.steps = 25;
  cfg.seed = 5;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Summary, Examples) {
  const auto a = summarize_losses({1, 2, 3});
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(a.median, 2.0);
  EXPECT_EQ(a.std, 1.0);
  EXPECT_EQ(a.best, 1.0);
  const auto b = summarize_losses({100, 3, 1, 2});
  EXPECT_EQ(b.median, 2.5);
  EXPECT_EQ(b.mean, 26.5);
  EXPECT_EQ(b.best, 1.0);
  EXPECT_EQ(summarize_losses({4}).std, 0.0);
}

TEST(Harness, RoundSeedDependsOnAllCoordinates) {
  const auto s = round_seed(42, "Branin", Variant::atpe, 3);
  EXPECT_EQ(s, round_seed(42, "Branin", Variant::atpe, 3));
  EXPECT_NE(s, round_seed(43, "Branin", Variant::atpe, 3));
  EXPECT_NE(s, round_seed(42, "Levy", Variant::atpe, 3));
  EXPECT_NE(s, round_seed(42, "Branin", Variant::tpe, 3));
  EXPECT_NE(s, round_seed(42, "Branin", Variant::atpe, 4));
}

TEST(Harness, DeterministicAndThreadIndependent) {
  auto cfg = small_config();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  cfg.threads = 4;
  const auto c = run_experiment(cfg);
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  EXPECT_EQ(traces_csv(a), traces_csv(b));
  EXPECT_EQ(summary_csv(a), summary_csv(c));
  EXPECT_EQ(traces_csv(a), traces_csv(c));
  EXPECT_EQ(filters_csv(a), filters_csv(c));
}

TEST(Harness, CellsAreIndependentOfTheRestOfTheGrid) {
  auto cfg = small_config();
  const auto full = run_experiment(cfg);
  cfg.benchmarks = {"Branin"};
  cfg.variants = {Variant::atpe};
  const auto single = run_experiment(cfg);
  for (const auto& cell : full.cells) {
    if (cell.benchmark == "Branin" && cell.variant == Variant::atpe) {
      EXPECT_EQ(cell.losses(), single.cells[0].losses());
    }
  }
}

TEST(Harness, FilesAreByteIdenticalAcrossRuns) {
  const auto base = std::filesystem::temp_directory_path() / ("atpe_harness_" + std::to_string(::getpid()));
  const auto r = run_experiment(small_config());
  summarize(r, base / "a");
  summarize(run_experiment(small_config()), base / "b", true);
  for (const char* f : {"summary.csv", "traces.csv", "filters.csv"})
    EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  EXPECT_TRUE(std::filesystem::exists(base / "b" / "convergence_Branin.svg"));
  std::filesystem::remove_all(base);
}

TEST(Harness, SummaryIsRecomputableFromTraces) {
  const auto cfg = small_config();
  const auto r = run_experiment(cfg);
  std::map<std::pair<std::string, std::string>, std::vector<double>> finals;
  std::istringstream traces(traces_csv(r));
  std::string line;
  std::getline(traces, line);
  while (std::getline(traces, line)) {
    std::vector<std::string> col;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) col.push_back(cell);
    ASSERT_EQ(col.size(), 5u);
    if (std::stoul(col[3]) == cfg.steps) finals[{col[0], col[1]}].push_back(std::stod(col[4]));
  }
  std::istringstream summary(summary_csv(r));
  std::getline(summary, line);
  EXPECT_EQ(line, "benchmark,variant,mean,median,std,best");
  std::size_t rows = 0;
  while (std::getline(summary, line)) {
    std::vector<std::string> col;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) col.push_back(cell);
    const auto s = summarize_losses(finals.at({col[0], col[1]}));
    EXPECT_EQ(std::stod(col[2]), s.mean);
    EXPECT_EQ(std::stod(col[3]), s.median);
    EXPECT_EQ(std::stod(col[4]), s.std);
    EXPECT_EQ(std::stod(col[5]), s.best);
    ++rows;
  }
  EXPECT_EQ(rows, 6u);
}

TEST(Harness, TracesAreNonIncreasing) {
  const auto r = run_experiment(small_config());
  for (const auto& c : r.cells)
    for (const auto& round : c.rounds) {
      ASSERT_EQ(round.trace.size(), 25u);
      for (std::size_t i = 1; i < round.trace.size(); ++i) ASSERT_LE(round.trace[i], round.trace[i - 1]);
      EXPECT_EQ(round.final_loss, round.trace.back());
    }
}

TEST(Harness, FilterFrequenciesSumToOne) {
  const auto r = run_experiment(small_config());
  for (const auto& c : r.cells) {
    const auto f = filter_frequencies(c);
    const double total = std::accumulate(f.begin(), f.end(), 0.0);
    if (c.variant == Variant::tpe) EXPECT_EQ(total, 0.0);
    else EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const auto csv = filters_csv(r);
  EXPECT_EQ(csv.find("\ntpe,"), std::string::npos);
  EXPECT_NE(csv.find("atpe-f,Branin,"), std::string::npos);
}

TEST(Harness, SingleStepEqualsPriorSample) {
  ExperimentConfig cfg;
  cfg.benchmarks = {"Levy"};
  cfg.variants = {Variant::atpe};
  cfg.rounds = 1;
  cfg.steps = 1;
  const auto r = run_experiment(cfg);
  const auto& b = bench::get("Levy");
  RngStream rng(round_seed(cfg.seed, "Levy", Variant::atpe, 0), 0);
  EXPECT_EQ(r.cells[0].rounds[0].final_loss, b.evaluate(sample_prior(b.space(), rng)));
}

TEST(Harness, InvalidConfigIsRejected) {
  auto cfg = small_config();
  cfg.rounds = 0;
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.steps = 0;
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.benchmarks.push_back("Nope");
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}

TEST(Harness, DoublesRoundTripThroughText) {
  for (double v : {0.1, -6.020740055767083, 1e-300, 3.0, 0.39788735772973816})
    EXPECT_EQ(std::stod(fmt_double(v)), v);
}
