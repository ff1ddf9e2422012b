#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mfh/segments.hpp"

using namespace mfh;

namespace {

Mat random_values(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Mat x(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) x(i, j) = g(rng);
  return x;
}

double loop_sup_norm(const Mat& x) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) s += x(i, j) * x(i, j);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

TEST(TimeGrid, FromDurationsCountsSteps) {
  const auto g = TimeGrid::from_durations(0.01, 0.2, 2.0);
  EXPECT_EQ(g.n_lag(), 20u);
  EXPECT_EQ(g.n_steps(), 200u);
  EXPECT_EQ(g.window(), 21u);
  EXPECT_DOUBLE_EQ(g.time(50), 0.5);
}

TEST(TimeGrid, RejectsNonIntegralLag) {
  EXPECT_THROW(TimeGrid::from_durations(0.03, 0.1, 0.3), std::exception);
  EXPECT_THROW(TimeGrid::from_durations(0.1, 0.2, 0.25), std::exception);
  EXPECT_THROW(TimeGrid::from_durations(0.0, 0.2, 1.0), std::exception);
}

TEST(Segment, RejectsWrongShapeAndNonFinite) {
  EXPECT_THROW(Segment(Mat::Zero(3, 2), 1, 1), ShapeError);
  Mat bad = Mat::Zero(2, 3);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(Segment(bad, 1, 1), std::exception);
}

TEST(SegmentAt, ConstantPathGivesConstantSegment) {
  PathRecord p{Mat::Constant(2, 8, 1.5), 1, 1, 2};
  for (std::size_t s = 0; s <= p.n_steps(); ++s) {
    EXPECT_TRUE(segment_at(p, s).values().isApprox(Mat::Constant(2, 3, 1.5)));
  }
}

TEST(SegmentAt, StepZeroIsInitialSegment) {
  std::mt19937_64 rng(1);
  PathRecord p{random_values(rng, 2, 9), 1, 1, 3};
  EXPECT_EQ(segment_at(p, 0).values(), p.states.leftCols(4));
}

TEST(SegmentAt, WindowIndicesByHand) {
  // states[i] = i e_1 for grid indices -2..N; the segment at step 3 holds indices 1, 2, 3.
  const std::size_t n_lag = 2;
  Mat states = Mat::Zero(2, 8);
  for (Eigen::Index c = 0; c < states.cols(); ++c) states(0, c) = static_cast<double>(c) - static_cast<double>(n_lag);
  PathRecord p{states, 1, 1, n_lag};
  const Segment s = segment_at(p, 3);
  EXPECT_DOUBLE_EQ(s.at(0)(0), 1.0);
  EXPECT_DOUBLE_EQ(s.at(1)(0), 2.0);
  EXPECT_DOUBLE_EQ(s.at(2)(0), 3.0);
  EXPECT_DOUBLE_EQ(s.at(2)(1), 0.0);
}

TEST(SegmentAt, OutOfRangeThrows) {
  PathRecord p{Mat::Zero(2, 5), 1, 1, 2};
  EXPECT_THROW(segment_at(p, 3), RangeError);
}

TEST(SupNorm, Examples) {
  EXPECT_EQ(sup_norm(Segment(Mat::Zero(2, 3), 1, 1)), 0.0);
  Vec c(2);
  c << 3.0, -4.0;
  EXPECT_DOUBLE_EQ(sup_norm(Segment::constant(c, 1, 4)), 5.0);
  Mat v(2, 3);
  v << 1, 0, 2, 0, -3, 2;
  EXPECT_DOUBLE_EQ(sup_norm(Segment(v, 1, 1)), 3.0);
}

TEST(SegmentDistance, IdentityAndConstants) {
  std::mt19937_64 rng(2);
  const Segment a(random_values(rng, 3, 5), 1, 2);
  EXPECT_EQ(segment_distance(a, a), 0.0);
  Vec x(2), y(2);
  x << 1.0, 2.0;
  y << 4.0, -2.0;
  EXPECT_DOUBLE_EQ(segment_distance(Segment::constant(x, 1, 3), Segment::constant(y, 1, 3)), 5.0);
}

TEST(SegmentDistance, MatchesSupNormOfDifference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat va = random_values(rng, 4, 6), vb = random_values(rng, 4, 6);
    const Segment a(va, 2, 2), b(vb, 2, 2);
    EXPECT_NEAR(segment_distance(a, b), loop_sup_norm(va - vb), 1e-14);
    EXPECT_DOUBLE_EQ(segment_distance(a, b), segment_distance(b, a));
  }
}

TEST(SegmentDistance, TriangleInequality) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Segment a(random_values(rng, 2, 4), 1, 1), b(random_values(rng, 2, 4), 1, 1),
        c(random_values(rng, 2, 4), 1, 1);
    EXPECT_LE(segment_distance(a, c), segment_distance(a, b) + segment_distance(b, c) + 1e-12);
  }
}

TEST(SegmentDistance, ShapeMismatchThrows) {
  EXPECT_THROW(segment_distance(Segment(Mat::Zero(2, 3), 1, 1), Segment(Mat::Zero(2, 4), 1, 1)), ShapeError);
}
