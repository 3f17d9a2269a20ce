#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "atpe/surrogate.hpp"

using namespace atpe;
using namespace atpe::surrogate;

namespace {

SurrogateAtom atom(AtomKind k, double a, double b, double c = 0.0, std::size_t d0 = 0, std::size_t d1 = 0) {
  SurrogateAtom x;
  x.kind = k;
  x.a = a;
  x.b = b;
  x.c = c;
  x.dims = {d0, d1};
  return x;
}

double at(const SurrogateAtom& a, std::vector<double> h) { return evaluate_atom(a, h); }

}  // namespace

TEST(Atoms, SigmoidMidpoint) {
  for (double b : {0.0, 0.3, 0.77, 1.0}) EXPECT_DOUBLE_EQ(at(atom(AtomKind::sigmoid, 13.0, b), {b}), 0.5);
}

TEST(Atoms, HyperbolicProductVanishesAtZero) {
  EXPECT_EQ(at(atom(AtomKind::hyperbolic_product, 2.0, 1.5, 0.3, 0, 1), {0.0, 0.8}), 0.0);
}

TEST(Atoms, Formulas) {
  EXPECT_DOUBLE_EQ(at(atom(AtomKind::gaussian_peak, 4, 0.5), {0.5}), 1.0);
  EXPECT_DOUBLE_EQ(at(atom(AtomKind::sine_wave, 2, 0.1), {0.3}), std::sin(0.7));
  EXPECT_DOUBLE_EQ(at(atom(AtomKind::gaussian_product, 2, 0.2, 0.6, 0, 1), {0.2, 0.6}), 1.0);
  EXPECT_DOUBLE_EQ(at(atom(AtomKind::sine_product, 2, 3, 0, 0, 1), {0.4, 0.5}), std::sin(0.8) * std::sin(1.5));
  EXPECT_DOUBLE_EQ(at(atom(AtomKind::hyperbolic_product, 1, 2, 0.5, 0, 1), {0.5, 0.25}),
                   std::sinh(0.5) * std::sinh(0.5) / (0.5 + std::cosh(0.125)));
}

TEST(Atoms, WeightedSumExample) {
  SurrogateFunction f;
  f.dims = 1;
  f.atoms = {atom(AtomKind::linear, 2, 0), atom(AtomKind::quadratic, 1, 0)};
  const std::vector<double> h{0.5};
  EXPECT_DOUBLE_EQ(evaluate_surrogate(f, h), 1.25);
}

TEST(Atoms, HyperbolicProductHasNoPoleOnTheCube) {
  RngStream rng(12);
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(0.5, 3), b = rng.uniform(0.5, 3), c = rng.uniform(0, 2);
    const double x = rng.uniform(), y = rng.uniform();
    const double den = c + std::cosh(x * y);
    ASSERT_GE(den, c + 1.0);
    const double v = at(atom(AtomKind::hyperbolic_product, a, b, c, 0, 1), {x, y});
    ASSERT_TRUE(std::isfinite(v));
    ASSERT_LE(std::abs(v), std::sinh(a) * std::sinh(b) / (c + 1.0) + 1e-12);
  }
}

TEST(Generate, AtomCounts) {
  RngStream rng(1);
  const auto f1 = generate_surrogate(1, base_pool(), rng);
  EXPECT_EQ(f1.atoms.size(), 1u);
  EXPECT_EQ(arity(f1.atoms[0].kind), 1u);
  const auto f6 = generate_surrogate(6, base_pool(), rng);
  std::size_t unary = 0, binary = 0;
  for (const auto& a : f6.atoms) (arity(a.kind) == 1 ? unary : binary)++;
  EXPECT_EQ(unary, 6u);
  EXPECT_EQ(binary, 3u);
}

TEST(Generate, SameSeedSameFunction) {
  RngStream a(44), b(44);
  EXPECT_EQ(generate_surrogate(5, extended_pool(), a), generate_surrogate(5, extended_pool(), b));
}

TEST(Generate, ParameterRangesAndDistinctPairs) {
  RngStream rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const auto f = generate_surrogate(1 + rng.index(8), extended_pool(), rng);
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& a : f.atoms) {
      ASSERT_LT(a.dims[0], f.dims);
      ASSERT_LT(a.dims[1], f.dims);
      EXPECT_GE(a.weight, 0.5);
      EXPECT_LE(a.weight, 2.0);
      if (arity(a.kind) == 1) {
        EXPECT_GE(a.a, 1.0);
        EXPECT_LE(a.a, 20.0);
        EXPECT_GE(a.b, 0.0);
        EXPECT_LE(a.b, 1.0);
      } else {
        EXPECT_NE(a.dims[0], a.dims[1]);
        EXPECT_TRUE(pairs.insert({std::min(a.dims[0], a.dims[1]), std::max(a.dims[0], a.dims[1])}).second);
        EXPECT_GE(a.a, 0.5);
        EXPECT_LE(a.b, 3.0);
        EXPECT_GE(a.c, 0.0);
        EXPECT_LE(a.c, 2.0);
      }
    }
  }
}

TEST(Generate, PoolsControlReachableKinds) {
  auto reachable = [](const AtomPool& pool) {
    RngStream rng(9);
    AtomPool seen;
    for (int i = 0; i < 2000; ++i)
      for (const auto& a : generate_surrogate(4, pool, rng).atoms) seen.insert(a.kind);
    return seen;
  };
  EXPECT_EQ(reachable(base_pool()), base_pool());
  EXPECT_EQ(reachable(extended_pool()), extended_pool());
  auto expected = base_pool();
  expected.insert(AtomKind::sigmoid);
  expected.insert(AtomKind::hyperbolic_product);
  EXPECT_EQ(extended_pool(), expected);
  EXPECT_FALSE(base_pool().contains(AtomKind::sigmoid));
  EXPECT_FALSE(base_pool().contains(AtomKind::hyperbolic_product));
}

TEST(Generate, FiniteEverywhereOnTheCube) {
  RngStream rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = generate_surrogate(1 + rng.index(6), extended_pool(), rng);
    std::vector<double> p(f.dims);
    for (int i = 0; i < 200; ++i) {
      for (auto& x : p) x = rng.uniform();
      const double v = evaluate_surrogate(f, p);
      ASSERT_TRUE(std::isfinite(v));
      ASSERT_EQ(v, evaluate_surrogate(f, p));
    }
  }
}

TEST(Corpus, JsonLinesRoundTrip) {
  RngStream rng(3);
  const auto corpus = generate_corpus(25, 6, extended_pool(), rng);
  std::stringstream ss;
  write_corpus(ss, corpus);
  EXPECT_EQ(read_corpus(ss), corpus);
}

TEST(Corpus, DimsWithinBounds) {
  RngStream rng(3);
  std::set<std::size_t> dims;
  for (const auto& f : generate_corpus(300, 6, base_pool(), rng)) dims.insert(f.dims);
  EXPECT_EQ(dims, (std::set<std::size_t>{1, 2, 3, 4, 5, 6}));
}

TEST(Corpus, MalformedLinesAreReported) {
  std::stringstream bad("{\"dims\":1,\"atoms\":[]}\nnot json\n");
  try {
    read_corpus(bad);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::stringstream pole(R"({"dims":2,"atoms":[{"kind":"hyperbolic_product","dims":[0,1],"a":1,"b":1,"c":-1,"weight":1}]})");
  EXPECT_THROW(read_corpus(pole), std::runtime_error);
  std::stringstream range(R"({"dims":1,"atoms":[{"kind":"linear","dims":[3],"a":1,"b":1,"c":0,"weight":1}]})");
  EXPECT_THROW(read_corpus(range), std::runtime_error);
}

TEST(ClusterCorpus, KEqualsCorpusKeepsEverything) {
  RngStream rng(4);
  const auto corpus = generate_corpus(12, 4, base_pool(), rng);
  const auto reps = cluster_corpus(corpus, 12, 50, rng);
  std::vector<std::size_t> all(12);
  std::iota(all.begin(), all.end(), std::size_t{0});
  EXPECT_EQ(reps, all);
}

TEST(ClusterCorpus, SingleCluster) {
  RngStream rng(4);
  const auto corpus = generate_corpus(10, 4, base_pool(), rng);
  EXPECT_EQ(cluster_corpus(corpus, 1, 50, rng).size(), 1u);
  EXPECT_THROW(cluster_corpus(corpus, 11, 50, rng), std::invalid_argument);
}

TEST(ClusterCorpus, SeparatesFamilies) {
  int separated = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RngStream rng(seed);
    std::vector<SurrogateFunction> corpus;
    for (int i = 0; i < 5; ++i) corpus.push_back(generate_surrogate(2, AtomPool{AtomKind::linear}, rng));
    for (int i = 0; i < 5; ++i) corpus.push_back(generate_surrogate(2, AtomPool{AtomKind::sine_wave}, rng));
    const auto reps = cluster_corpus(corpus, 2, 200, rng);
    separated += reps.size() == 2 && (reps[0] < 5) != (reps[1] < 5);
  }
  EXPECT_GE(separated, 95);
}
