#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "mfh/noise.hpp"
#include "mfh/parallel.hpp"

using namespace mfh;

TEST(Philox, KnownAnswer) {
  // Reference vector from the Random123 distribution (philox4x32_10, all-ones input).
  const auto out = detail::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, ZeroKnownAnswer) {
  const auto out = detail::philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(NoiseStream, SameCounterSameVector) {
  const NoiseStream s{42, 7};
  EXPECT_EQ(s.increments(13, 5, 0.01), s.increments(13, 5, 0.01));
  EXPECT_EQ(gaussian_increments(s, 13, 5, 0.01), s.increments(13, 5, 0.01));
}

TEST(NoiseStream, DistinctStreamsStepsSeedsDiffer) {
  const Vec a = NoiseStream{1, 0}.standard_normals(0, 4);
  EXPECT_NE(a, (NoiseStream{1, 1}.standard_normals(0, 4)));
  EXPECT_NE(a, (NoiseStream{1, 0}.standard_normals(1, 4)));
  EXPECT_NE(a, (NoiseStream{2, 0}.standard_normals(0, 4)));
  EXPECT_NE(a, (NoiseStream{1, std::uint64_t{1} << 32}.standard_normals(0, 4)));
}

TEST(NoiseStream, PrefixIsStableAcrossDimension) {
  const NoiseStream s{9, 3};
  const Vec a = s.standard_normals(5, 3), b = s.standard_normals(5, 6);
  EXPECT_EQ(a, b.head(3));
}

TEST(NoiseStream, MeanWithinCltBound) {
  const double dt = 0.01;
  const std::size_t n = 100000, d = 3;
  Vec sum = Vec::Zero(d);
  for (std::size_t k = 0; k < n; ++k) sum += NoiseStream{2024, k % 97}.increments(k, d, dt);
  const Vec mean = sum / static_cast<double>(n);
  for (Eigen::Index i = 0; i < mean.size(); ++i) EXPECT_LT(std::abs(mean(i)), 4.0 * std::sqrt(dt / n));
}

TEST(NoiseStream, VarianceWithinFivePercent) {
  const double dt = 0.01;
  const std::size_t n = 100000, d = 2;
  Vec sum = Vec::Zero(d), sq = Vec::Zero(d);
  const NoiseStream s{77, 5};
  for (std::size_t k = 0; k < n; ++k) {
    const Vec x = s.increments(k, d, dt);
    sum += x;
    sq += x.cwiseProduct(x);
  }
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
    const double mean = sum(i) / n;
    const double var = sq(i) / n - mean * mean;
    EXPECT_NEAR(var, dt, 0.05 * dt);
  }
}

TEST(NoiseStream, CoordinatesUncorrelated) {
  const std::size_t n = 100000;
  double cross = 0.0;
  const NoiseStream s{3, 0};
  for (std::size_t k = 0; k < n; ++k) {
    const Vec z = s.standard_normals(k, 2);
    cross += z(0) * z(1);
  }
  EXPECT_LT(std::abs(cross / n), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(DeriveSeed, TagsAndIndicesSeparate) {
  std::set<std::uint64_t> seen;
  for (const char* tag : {"a", "b", "init", "noise"})
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(11, tag, i));
  EXPECT_EQ(seen.size(), 200u);
  EXPECT_EQ(derive_seed(11, "init", 3), derive_seed(11, "init", 3));
  EXPECT_NE(derive_seed(11, "init", 3), derive_seed(12, "init", 3));
}

TEST(CounterRng, UniformAndIndexRanges) {
  CounterRng rng(5);
  double sum = 0.0;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    const auto k = rng.index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  EXPECT_NEAR(sum / 70000.0, 0.5, 0.01);
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(CounterRng, Reproducible) {
  CounterRng a(8, 2), b(8, 2);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrowsLowest) {
  for (std::size_t threads : {1u, 3u, 8u}) {
    set_thread_count(threads);
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    try {
      parallel_for(100, [](std::size_t i) {
        if (i == 17 || i == 90) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected throw";
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "17");
    }
  }
  set_thread_count(0);
}
