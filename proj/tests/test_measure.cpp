#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfh/assignment.hpp"
#include "mfh/measure.hpp"
#include "mfh/parallel.hpp"
#include "oracles.hpp"

using namespace mfh;

namespace {

Segment random_segment(std::mt19937_64& rng, std::size_t m, std::size_t d, std::size_t n_lag, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat x(static_cast<Eigen::Index>(m + d), static_cast<Eigen::Index>(n_lag + 1));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = g(rng);
  return Segment(x, m, d);
}

EmpiricalMeasure random_measure(std::mt19937_64& rng, std::size_t n, std::size_t m = 1, std::size_t d = 1,
                                std::size_t n_lag = 2) {
  std::vector<Segment> atoms;
  for (std::size_t i = 0; i < n; ++i) atoms.push_back(random_segment(rng, m, d, n_lag));
  return EmpiricalMeasure(atoms);
}

}  // namespace

TEST(Assignment, MatchesPermutationMinimumOnSmallMatrices) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    Mat c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = trial % 3 == 0 ? std::floor(u(rng)) : u(rng);
    const auto match = solve_assignment(c);
    std::vector<bool> used(n, false);
    double got = 0.0;
    for (int i = 0; i < n; ++i) {
      ASSERT_FALSE(used[match[i]]);
      used[match[i]] = true;
      got += c(i, static_cast<Eigen::Index>(match[i]));
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = HUGE_VAL;
    do {
      double t = 0.0;
      for (int i = 0; i < n; ++i) t += c(i, perm[i]);
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(got, best, 1e-12 * (1.0 + best));
  }
}

TEST(Assignment, DiagonalOptimumIsFound) {
  Mat c = Mat::Constant(50, 50, 1.0);
  c.diagonal().setZero();
  const auto match = solve_assignment(c);
  for (std::size_t i = 0; i < match.size(); ++i) EXPECT_EQ(match[i], i);
}

TEST(WassersteinExact, SameAtomsIsZero) {
  std::mt19937_64 rng(11);
  const auto a = random_measure(rng, 20);
  EXPECT_EQ(wasserstein_exact(a, a, 2.0), 0.0);
}

TEST(WassersteinExact, PermutedAtomsIsZero) {
  std::mt19937_64 rng(12);
  std::vector<Segment> atoms;
  for (int i = 0; i < 15; ++i) atoms.push_back(random_segment(rng, 1, 1, 3));
  std::vector<Segment> shuffled = atoms;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(wasserstein_exact(EmpiricalMeasure(atoms), EmpiricalMeasure(shuffled), 1.5), 0.0);
}

TEST(WassersteinExact, SingleAtomIsSegmentDistance) {
  std::mt19937_64 rng(13);
  for (double theta : {1.0, 1.7, 2.0, 3.0}) {
    const Segment x = random_segment(rng, 2, 1, 4), y = random_segment(rng, 2, 1, 4);
    EXPECT_NEAR(wasserstein_exact(EmpiricalMeasure({x}), EmpiricalMeasure({y}), theta), segment_distance(x, y), 1e-14);
  }
}

TEST(WassersteinExact, MatchesBruteForce) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 6;
    const double theta = std::vector<double>{1.0, 1.5, 2.0, 3.0}[trial % 4];
    const auto a = random_measure(rng, n), b = random_measure(rng, n);
    const double oracle = oracle::brute_force_w(a, b, theta);
    EXPECT_NEAR(wasserstein_exact(a, b, theta), oracle, 1e-12 * oracle);
  }
}

TEST(WassersteinExact, BoundedByCouplingCost) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_measure(rng, 40), b = random_measure(rng, 40);
    EXPECT_LE(wasserstein_exact(a, b, 2.0), coupling_cost(a, b, 2.0) + 1e-12);
  }
}

TEST(WassersteinExact, MetricAxioms) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_measure(rng, 12), b = random_measure(rng, 12), c = random_measure(rng, 12);
    const double ab = wasserstein_exact(a, b, 2.0);
    EXPECT_NEAR(ab, wasserstein_exact(b, a, 2.0), 1e-12);
    EXPECT_LE(wasserstein_exact(a, c, 2.0), ab + wasserstein_exact(b, c, 2.0) + 1e-12);
  }
}

TEST(WassersteinExact, ThreadCountInvariant) {
  std::mt19937_64 rng(17);
  const auto a = random_measure(rng, 300), b = random_measure(rng, 300);
  set_thread_count(1);
  const double one = wasserstein_exact(a, b, 2.0);
  set_thread_count(5);
  const double five = wasserstein_exact(a, b, 2.0);
  set_thread_count(0);
  EXPECT_EQ(one, five);
}

TEST(WassersteinExact, RejectsUnequalSizesAndCap) {
  std::mt19937_64 rng(18);
  EXPECT_THROW(wasserstein_exact(random_measure(rng, 3), random_measure(rng, 4), 2.0), ShapeError);
  ExactOtOptions opts;
  opts.max_atoms = 4;
  EXPECT_THROW(wasserstein_exact(random_measure(rng, 5), random_measure(rng, 5), 2.0, opts), DomainError);
}

TEST(WassersteinSliced, IdenticalIsZero) {
  std::mt19937_64 rng(19);
  const auto a = random_measure(rng, 30);
  EXPECT_EQ(wasserstein_sliced(a, a, 2.0, 16, 1), 0.0);
}

TEST(WassersteinSliced, TranslationWithOneDirection) {
  std::mt19937_64 rng(20);
  std::vector<Segment> atoms, shifted;
  Mat v(2, 3);
  v << 0.3, -1.0, 2.0, 0.5, 0.0, -0.7;
  for (int i = 0; i < 10; ++i) {
    atoms.push_back(random_segment(rng, 1, 1, 2));
    shifted.emplace_back(atoms.back().values() + v, 1, 1);
  }
  const std::uint64_t seed = 99;
  // The single projection direction, recomputed from the same stream.
  const Vec u = NoiseStream{seed, 0}.standard_normals(0, 6).normalized();
  const Eigen::Map<const Vec> v_flat(v.data(), 6);
  EXPECT_NEAR(wasserstein_sliced(EmpiricalMeasure(atoms), EmpiricalMeasure(shifted), 1.0, 1, seed),
              std::abs(v_flat.dot(u)), 1e-12);
}

TEST(WassersteinSliced, RecordedAgainstExact) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_measure(rng, 64), b = random_measure(rng, 64);
    const double exact = wasserstein_exact(a, b, 2.0);
    const double sliced = wasserstein_sliced(a, b, 2.0, 32, trial);
    // Projections onto unit vectors never increase the Frobenius distance, which is at most
    // sqrt(n_lag + 1) times the sup-norm distance.
    EXPECT_LE(sliced, std::sqrt(3.0) * exact + 1e-12);
    EXPECT_GT(sliced, 0.0);
  }
}

TEST(Moment, Examples) {
  EXPECT_EQ(moment(EmpiricalMeasure({Segment(Mat::Zero(2, 3), 1, 1)}), 2.0), 0.0);
  Vec c(2);
  c << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(moment(EmpiricalMeasure({Segment::constant(c, 1, 2)}), 2.0), 5.0);
  Vec one(2), three(2);
  one << 1.0, 0.0;
  three << 0.0, 3.0;
  EXPECT_DOUBLE_EQ(moment(EmpiricalMeasure({Segment::constant(one, 1, 2), Segment::constant(three, 1, 2)}), 2.0), 5.0);
}

TEST(Subsample, DistinctSortedAndReproducible) {
  std::mt19937_64 rng(22);
  const auto a = random_measure(rng, 50);
  const auto s1 = subsample(a, 20, 5), s2 = subsample(a, 20, 5);
  ASSERT_EQ(s1.size(), 20u);
  EXPECT_EQ(wasserstein_exact(s1, s2, 2.0), 0.0);
  EXPECT_EQ(wasserstein_exact(subsample(a, 50, 3), a, 2.0), 0.0);
}

TEST(EmpiricalMeasure, RejectsMixedShapes) {
  EXPECT_THROW(EmpiricalMeasure({Segment(Mat::Zero(2, 3), 1, 1), Segment(Mat::Zero(2, 4), 1, 1)}), ShapeError);
  EXPECT_THROW(EmpiricalMeasure(std::vector<Segment>{}), std::exception);
}
