#include <gtest/gtest.h>

#include "atpe/filtering.hpp"

using namespace atpe;
using namespace atpe::filtering;

namespace {

const SearchSpace kLine({HyperparameterSpec::continuous("x", 0, 1)});

History losses_history(const std::vector<double>& losses) {
  History h;
  for (std::size_t i = 0; i < losses.size(); ++i) h.append({static_cast<double>(i) / losses.size()}, losses[i]);
  return h;
}

std::vector<double> losses_of(const History& h) { return h.losses(); }

std::vector<std::uint64_t> ids_of(const History& h) {
  std::vector<std::uint64_t> out;
  for (const auto& t : h) out.push_back(t.id);
  return out;
}

FilterParams mode(FilterMode m) {
  FilterParams p;
  p.mode = m;
  return p;
}

}  // namespace

TEST(Filter, NoneIsIdentity) {
  RngStream rng(1);
  const auto h = losses_history({4, 2, 9, 1, 7});
  const auto r = filter_history(h, mode(FilterMode::none), kLine, rng);
  EXPECT_EQ(ids_of(r.history), ids_of(h));
  EXPECT_EQ(r.status, FilterStatus::ok);
}

TEST(Filter, ZscoreWorkedExample) {
  RngStream rng(1);
  auto p = mode(FilterMode::zscore);
  p.zscore_threshold = 2.9;
  const auto r = filter_history(losses_history({1, 2, 3, 4, 5}), p, kLine, rng);
  EXPECT_EQ(losses_of(r.history), (std::vector<double>{1, 2, 3}));
}

TEST(Filter, ZscorePopulationSigma) {
  const auto z = zscores(losses_history({1, 2, 3, 4, 5}));
  EXPECT_NEAR(z[0], -std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(z[1], -std::sqrt(2.0) / 2, 1e-15);
  EXPECT_EQ(z[2], 0.0);
}

TEST(Filter, ZscoreNegativeThresholdKeepsUpperTail) {
  RngStream rng(1);
  auto p = mode(FilterMode::zscore);
  p.zscore_threshold = -0.5;
  const auto r = filter_history(losses_history({1, 2, 3, 4, 5}), p, kLine, rng);
  EXPECT_EQ(losses_of(r.history), (std::vector<double>{4, 5}));
}

TEST(Filter, ZscoreZeroThresholdRemovesOnlyOutliers) {
  RngStream rng(1);
  auto p = mode(FilterMode::zscore);
  const auto h = losses_history({3, 1, 4, 1, 5, 9, 2, 6});
  EXPECT_EQ(ids_of(filter_history(h, p, kLine, rng).history), ids_of(h));

  std::vector<double> spike(30, 0.0);
  spike[17] = 100.0;
  const auto r = filter_history(losses_history(spike), p, kLine, rng);
  EXPECT_EQ(r.history.size(), 29u);
}

TEST(Filter, ZscoreZeroSpreadIsFlagged) {
  RngStream rng(1);
  auto p = mode(FilterMode::zscore);
  p.zscore_threshold = 2.9;
  const auto h = losses_history({2, 2, 2});
  const auto r = filter_history(h, p, kLine, rng);
  EXPECT_EQ(r.status, FilterStatus::zero_spread);
  EXPECT_EQ(ids_of(r.history), ids_of(h));
}

TEST(Filter, ClusteringKeepsOnePerBlob) {
  const SearchSpace plane({HyperparameterSpec::continuous("a", 0, 1), HyperparameterSpec::continuous("b", 0, 1)});
  const std::vector<std::pair<double, double>> centres{{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream data(seed + 100);
    History h;
    for (int i = 0; i < 10; ++i) {
      const auto [cx, cy] = centres[static_cast<std::size_t>(i) % 3];
      h.append({cx + 0.01 * data.uniform(), cy + 0.01 * data.uniform()}, data.uniform());
    }
    auto p = mode(FilterMode::clustering);
    p.clusters_quantile = 0.3;
    RngStream rng(seed);
    const auto r = filter_history(h, p, plane, rng);
    ASSERT_EQ(r.history.size(), 3u) << "seed " << seed;
    std::set<std::size_t> blobs;
    for (const auto& t : r.history) blobs.insert(static_cast<std::size_t>(t.id % 3));
    EXPECT_EQ(blobs.size(), 3u);
  }
}

TEST(Filter, RandomExtremes) {
  RngStream rng(2);
  const auto h = losses_history({5, 3, 8, 1, 9, 2});
  auto p = mode(FilterMode::random);
  p.random_probability = 0.0;
  EXPECT_EQ(ids_of(filter_history(h, p, kLine, rng).history), ids_of(h));
  p.random_probability = 1.0;
  const auto r = filter_history(h, p, kLine, rng);
  EXPECT_EQ(r.status, FilterStatus::best_only);
  EXPECT_EQ(losses_of(r.history), (std::vector<double>{1}));
}

TEST(Filter, RandomKeepRate) {
  RngStream rng(3);
  std::vector<double> l(2000);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<double>(i);
  auto p = mode(FilterMode::random);
  p.random_probability = 0.3;
  const auto r = filter_history(losses_history(l), p, kLine, rng);
  EXPECT_NEAR(static_cast<double>(r.history.size()) / 2000.0, 0.7, 0.04);
}

TEST(Filter, AgeEliminatesOldestFirst) {
  // Multiplier 1: the oldest trial (rank N) is always eliminated, the newest
  // with probability 1/N.
  const int n = 20;
  std::vector<int> survived(n, 0);
  std::vector<double> l(n);
  for (int i = 0; i < n; ++i) l[static_cast<std::size_t>(i)] = 100.0 - i;  // newest is best: fallback never hits the oldest
  const auto h = losses_history(l);
  auto p = mode(FilterMode::age);
  p.age_multiplier = 1.0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    RngStream rng(s);
    for (const auto& t : filter_history(h, p, kLine, rng).history) ++survived[t.id];
  }
  EXPECT_EQ(survived[0], 0);
  EXPECT_NEAR(survived[n - 1] / 2000.0, 1.0 - 1.0 / n, 0.03);
  EXPECT_NEAR(survived[n / 2] / 2000.0, 1.0 - 10.0 / n, 0.04);
}

TEST(Filter, LossEliminatesWorstFirst) {
  const int n = 10;
  std::vector<int> survived(n, 0);
  std::vector<double> l(n);
  for (int i = 0; i < n; ++i) l[static_cast<std::size_t>(i)] = i;  // id 0 is best
  const auto h = losses_history(l);
  auto p = mode(FilterMode::loss);
  p.loss_multiplier = 1.0;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    RngStream rng(s);
    for (const auto& t : filter_history(h, p, kLine, rng).history) ++survived[t.id];
  }
  EXPECT_EQ(survived[n - 1], 0);
  EXPECT_NEAR(survived[0] / 4000.0, 0.9, 0.03);
  EXPECT_NEAR(survived[4] / 4000.0, 0.5, 0.03);
  auto zero = p;
  zero.loss_multiplier = 0.0;
  RngStream rng(0);
  EXPECT_EQ(ids_of(filter_history(h, zero, kLine, rng).history), ids_of(h));
}

TEST(Filter, OutputIsNonEmptySubsequence) {
  const SearchSpace plane({HyperparameterSpec::continuous("a", 0, 1), HyperparameterSpec::categorical("c", {"p", "q"})});
  RngStream gen(77);
  for (int rep = 0; rep < 300; ++rep) {
    History h;
    const std::size_t n = 1 + gen.index(40);
    for (std::size_t i = 0; i < n; ++i) h.append({gen.uniform(), Choice{gen.index(2)}}, std::floor(gen.uniform() * 5));
    FilterParams p;
    p.mode = static_cast<FilterMode>(gen.index(kFilterModeCount));
    p.random_probability = gen.uniform();
    p.age_multiplier = 2 * gen.uniform();
    p.loss_multiplier = 2 * gen.uniform();
    p.clusters_quantile = 0.05 + 0.95 * gen.uniform();
    p.zscore_threshold = gen.uniform(-3, 3);
    const auto before = ids_of(h);
    const auto r = filter_history(h, p, plane, gen);
    ASSERT_FALSE(r.history.empty());
    EXPECT_EQ(ids_of(h), before);
    const auto ids = ids_of(r.history);
    EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
    EXPECT_TRUE(std::includes(before.begin(), before.end(), ids.begin(), ids.end()));
    for (const auto& t : r.history) EXPECT_EQ(t.loss, h[t.id].loss);
  }
}

TEST(Filter, EmptyHistoryStaysEmpty) {
  RngStream rng(1);
  EXPECT_TRUE(filter_history(History{}, mode(FilterMode::loss), kLine, rng).history.empty());
}
