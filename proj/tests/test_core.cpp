#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "atpe/history.hpp"
#include "atpe/rng.hpp"
#include "atpe/space.hpp"

using namespace atpe;

namespace {

/// Deterministic stand-in for RngStream: returns a fixed uniform value.
struct ConstantSource {
  double u = 0.5;
  double uniform() { return u; }
  std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n))); }
  double normal() { return 0.0; }
};

static_assert(RandomSource<ConstantSource>);
static_assert(RandomSource<RngStream>);

SearchSpace unit(std::string name = "x") { return SearchSpace({HyperparameterSpec::continuous(std::move(name), 0, 1)}); }

}  // namespace

TEST(Rng, SameSeedAndStreamReproduce) {
  RngStream a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndIndexRanges) {
  RngStream r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.index(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  RngStream r(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(SamplePrior, StubMidpoint) {
  ConstantSource stub;
  const auto c = sample_prior(unit(), stub);
  EXPECT_DOUBLE_EQ(std::get<double>(c[0]), 0.5);
}

TEST(SamplePrior, CategoricalFrequencies) {
  const SearchSpace space({HyperparameterSpec::categorical("c", {"A", "B"})});
  RngStream rng(7);
  int a = 0;
  for (int i = 0; i < 10000; ++i) a += std::get<Choice>(sample_prior(space, rng)[0]).index == 0;
  EXPECT_GE(a, 4500);
  EXPECT_LE(a, 5500);
}

TEST(SamplePrior, LogUniformMedian) {
  const SearchSpace space({HyperparameterSpec::continuous("x", 1, 100, Scale::log)});
  RngStream rng(3);
  std::vector<double> v;
  for (int i = 0; i < 10000; ++i) v.push_back(std::get<double>(sample_prior(space, rng)[0]));
  std::nth_element(v.begin(), v.begin() + 5000, v.end());
  EXPECT_GE(v[5000], 8.0);
  EXPECT_LE(v[5000], 12.5);
}

TEST(SamplePrior, IntegersCoverRangeAndStayInDomain) {
  const SearchSpace space({HyperparameterSpec::integer("k", 1, 4)});
  RngStream rng(5);
  std::array<int, 5> seen{};
  for (int i = 0; i < 2000; ++i) {
    const auto c = sample_prior(space, rng);
    ASSERT_TRUE(in_domain(space, c));
    ++seen[static_cast<std::size_t>(std::get<std::int64_t>(c[0]))];
  }
  for (int k = 1; k <= 4; ++k) EXPECT_GT(seen[static_cast<std::size_t>(k)], 0);
}

TEST(SamplePrior, ReplayIsBitIdentical) {
  const SearchSpace space({HyperparameterSpec::continuous("a", -3, 2), HyperparameterSpec::integer("b", 0, 9),
                           HyperparameterSpec::categorical("c", {"x", "y", "z"})});
  RngStream r1(99), r2(99);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_prior(space, r1), sample_prior(space, r2));
}

TEST(Encode, Examples) {
  const SearchSpace lin({HyperparameterSpec::continuous("x", 0, 10)});
  EXPECT_DOUBLE_EQ(encode_numeric({5.0}, lin)[0], 0.5);
  const SearchSpace cat({HyperparameterSpec::categorical("c", {"A", "B", "C"})});
  EXPECT_DOUBLE_EQ(encode_numeric({Choice{2}}, cat)[0], 1.0);
  const SearchSpace lg({HyperparameterSpec::continuous("x", 1, 100, Scale::log)});
  EXPECT_NEAR(encode_numeric({10.0}, lg)[0], 0.5, 1e-15);
}

TEST(Encode, OrderPreservingAndRoundTrips) {
  const auto spec = HyperparameterSpec::continuous("x", 1e-4, 10, Scale::log);
  double prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const double v = 1e-4 * std::pow(1e5, i / 100.0);
    const double u = encode_value(spec, std::min(v, 10.0));
    EXPECT_GT(u, prev);
    prev = u;
    EXPECT_NEAR(std::get<double>(decode_value(spec, u)), std::min(v, 10.0), 1e-9 * v);
  }
}

TEST(Space, ValidationNamesTheField) {
  auto msg = [](auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg([] { SearchSpace({HyperparameterSpec::continuous("x", 0, 1, Scale::log)}); }).find("params[0].lower"),
            std::string::npos);
  EXPECT_NE(msg([] { SearchSpace({HyperparameterSpec::continuous("x", 2, 1)}); }).find("params[0].lower"),
            std::string::npos);
  EXPECT_NE(msg([] {
              SearchSpace({HyperparameterSpec::continuous("x", 0, 1), HyperparameterSpec::categorical("c", {"A"})});
            }).find("params[1].choices"),
            std::string::npos);
  EXPECT_NE(msg([] {
              SearchSpace({HyperparameterSpec::continuous("x", 0, 1), HyperparameterSpec::continuous("x", 0, 2)});
            }).find("params[1].name"),
            std::string::npos);
  EXPECT_THROW(SearchSpace(std::vector<HyperparameterSpec>{}), std::invalid_argument);
}

TEST(Space, JsonRoundTrip) {
  const auto doc = nlohmann::json::parse(R"({"params":[
    {"name":"x","kind":"continuous","lower":0,"upper":1,"scale":"linear"},
    {"name":"lr","kind":"continuous","lower":0.001,"upper":1,"scale":"log"},
    {"name":"n","kind":"integer","lower":1,"upper":5},
    {"name":"c","kind":"categorical","choices":["A","B"]}]})");
  const auto space = space_from_json(doc);
  ASSERT_EQ(space.size(), 4u);
  EXPECT_EQ(space[1].scale, Scale::log);
  EXPECT_EQ(space[3].choices.size(), 2u);
  EXPECT_EQ(space_to_json(space_from_json(space_to_json(space))), space_to_json(space));
  EXPECT_EQ(*space.index_of("n"), 2u);
}

TEST(Space, JsonErrorsNameTheField) {
  try {
    space_from_json(nlohmann::json::parse(
        R"({"params":[{"name":"x","kind":"continuous","lower":0,"upper":1},{"name":"y","kind":"continuous","lower":0,"upper":1,"scale":"log"}]})"));
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("params[1].lower"), std::string::npos) << e.what();
  }
  EXPECT_THROW(space_from_json(nlohmann::json::parse(R"({"params":[{"name":"x","kind":"weird"}]})")),
               std::invalid_argument);
  EXPECT_THROW(space_from_json(nlohmann::json::parse(R"({"nope":1})")), std::invalid_argument);
}

TEST(Space, InDomain) {
  const SearchSpace space({HyperparameterSpec::continuous("x", 0, 1), HyperparameterSpec::integer("k", 0, 3),
                           HyperparameterSpec::categorical("c", {"A", "B"})});
  EXPECT_TRUE(in_domain(space, {0.3, std::int64_t{2}, Choice{1}}));
  EXPECT_FALSE(in_domain(space, {1.3, std::int64_t{2}, Choice{1}}));
  EXPECT_FALSE(in_domain(space, {0.3, std::int64_t{4}, Choice{1}}));
  EXPECT_FALSE(in_domain(space, {0.3, std::int64_t{2}, Choice{2}}));
  EXPECT_FALSE(in_domain(space, {0.3, 2.0, Choice{1}}));
  EXPECT_FALSE(in_domain(space, {0.3, std::int64_t{2}}));
}

TEST(History, AppendAssignsIncreasingIds) {
  History h;
  EXPECT_EQ(h.append({0.1}, 3.0), 0u);
  EXPECT_EQ(h.append({0.2}, 1.0), 1u);
  EXPECT_EQ(h[1].iteration, 1u);
  EXPECT_THROW(h.append({0.3}, std::nan("")), std::invalid_argument);
  EXPECT_THROW(h.push(Trial{1, {0.3}, 1.0, 2}), std::invalid_argument);
  EXPECT_EQ(h.size(), 2u);
  EXPECT_EQ(h.best_index(), 1u);
}

TEST(History, OrderByLossBreaksTiesById) {
  History h;
  h.push(Trial{3, {0.1}, 2.0, 0});
  h.push(Trial{7, {0.2}, 2.0, 1});
  h.push(Trial{9, {0.3}, 1.0, 2});
  EXPECT_EQ(h.order_by_loss(), (std::vector<std::size_t>{2, 0, 1}));
}
