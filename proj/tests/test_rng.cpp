#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include <eharq/rng.hpp>

using namespace eharq;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDiverge) {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 1000; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_LT(same, 5);
}

TEST(Rng, Uniform01Range) {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, UniformOpen01ExcludesZero) {
  Rng rng(7);
  for (int i = 0; i < 100000; ++i) EXPECT_GT(rng.uniform_open01(), 0.0);
}

TEST(Rng, UniformMomentsMatch) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // sd of sample mean = sqrt(1/12/n) ~ 6.5e-4
  EXPECT_NEAR(mean, 0.5, 3 * 6.5e-4);
  EXPECT_NEAR(var, 1.0 / 12.0, 3e-3);
}

TEST(Rng, NormalMomentsMatch) {
  Rng rng(13);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 0.03);
}

TEST(Rng, BernoulliWithin3Sigma) {
  Rng rng(17);
  const double p = 0.3;
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(p);
  const double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_NEAR(static_cast<double>(hits), n * p, 3 * sigma);
}

TEST(Rng, BelowStaysInBound) {
  Rng rng(19);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t v = rng.below(7);
    EXPECT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);  // all residues reached
}

TEST(Rng, SubstreamsAreIndependent) {
  Rng a = substream(99, stream_tag::kRecord, 0);
  Rng b = substream(99, stream_tag::kRecord, 1);
  Rng c = substream(99, stream_tag::kFading, 0);
  int ab = 0, ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    ab += va == b.next_u64();
    ac += va == c.next_u64();
  }
  EXPECT_LT(ab, 5);
  EXPECT_LT(ac, 5);
}

TEST(Rng, SubstreamIsDeterministic) {
  Rng a = substream(123, stream_tag::kMonteCarlo, 5);
  Rng b = substream(123, stream_tag::kMonteCarlo, 5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}
