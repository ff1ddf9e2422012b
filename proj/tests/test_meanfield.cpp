#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mfh/gallery.hpp"
#include "mfh/meanfield.hpp"
#include "mfh/parallel.hpp"
#include "oracles.hpp"

using namespace mfh;

namespace {

/// Mean of the momentum block at step k across a flow's atoms, with its standard error.
std::pair<double, double> y_mean_se(const EmpiricalMeasure& mu) {
  const double n = static_cast<double>(mu.size());
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double y = mu.atom_current(i)(1);
    s += y;
    s2 += y * y;
  }
  const double mean = s / n;
  return {mean, std::sqrt((s2 / n - mean * mean) / (n - 1.0))};
}

/// Synchronous particle update written out directly from euler_step.
std::vector<Mat> naive_particles(const ModelSpec& spec, const std::vector<Segment>& inits, const TimeGrid& grid,
                                 const std::vector<NoiseStream>& streams) {
  const std::size_t n = inits.size();
  std::vector<Mat> states(n);
  for (std::size_t i = 0; i < n; ++i) {
    states[i].resize(static_cast<Eigen::Index>(spec.dim()), static_cast<Eigen::Index>(grid.n_lag() + grid.n_steps() + 1));
    states[i].leftCols(static_cast<Eigen::Index>(grid.window())) = inits[i].values();
  }
  for (std::size_t step = 0; step < grid.n_steps(); ++step) {
    std::vector<Segment> atoms;
    for (std::size_t i = 0; i < n; ++i) {
      atoms.emplace_back(Mat(states[i].middleCols(static_cast<Eigen::Index>(step), static_cast<Eigen::Index>(grid.window()))),
                         spec.m, spec.d);
    }
    const EmpiricalMeasure law(atoms, spec.theta);
    // Reverse order: a synchronous scheme must not care.
    for (std::size_t i = n; i-- > 0;) {
      const Vec dW = streams[i].increments(step, spec.d, grid.dt());
      states[i].col(static_cast<Eigen::Index>(step + grid.window())) =
          euler_step(spec, grid.time(step), grid.dt(), atoms[i], law, dW);
    }
  }
  return states;
}

const ParamMap kCoupled = {{"alpha", 1.0}, {"beta", 1.0}, {"kappa", 1.0}, {"a", 0.5}, {"c", 0.2}};

}  // namespace

TEST(Picard, MeasureIndependentConvergesInOneStep) {
  const auto gm = linear_kinetic_delay({{"a", 0.0}, {"c", 0.3}});
  const auto grid = TimeGrid::from_durations(0.01, 0.1, 1.0);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(64, 1, grid, 3);
  PicardConfig cfg;
  cfg.M = 64;
  const auto res = picard_solve(gm.spec, EmpiricalMeasure(inits), grid, cfg, 9);
  ASSERT_TRUE(res.converged);
  ASSERT_EQ(res.trace.size(), 2u);
  EXPECT_GT(res.trace[0], 0.0);
  EXPECT_EQ(res.trace[1], 0.0);
}

TEST(Picard, MeanTracksScalarOde) {
  // kappa = 0 and r = 0: E[Y]' = (a - beta) E[Y]. The ensemble mean feels its own noise through
  // the mean field, so its standard error comes from the linear mean dynamics, not sd / sqrt(M).
  const double beta = 1.0, a = 0.5;
  const auto gm = linear_kinetic_delay({{"alpha", 1.0}, {"beta", beta}, {"kappa", 0.0}, {"a", a}, {"c", 0.0}});
  const auto grid = TimeGrid::from_durations(0.01, 0.0, 2.0);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(1024, 1, grid, 4);
  PicardConfig cfg;
  cfg.M = 1024;
  cfg.metric_stride = 20;
  const auto res = picard_solve(gm.spec, EmpiricalMeasure(inits), grid, cfg, 5);
  ASSERT_TRUE(res.converged);
  const double m0 = y_mean_se(res.flow.at(0)).first;
  for (std::size_t k = 20; k <= grid.n_steps(); k += 20) {
    const double t = grid.time(k);
    const double mean = y_mean_se(res.flow.at(k)).first;
    const double se = std::sqrt(oracle::ensemble_mean_covariance(Mat::Constant(1, 1, a - beta), Mat::Ones(1, 1), t, 1024)(0, 0));
    EXPECT_LE(std::abs(mean - m0 * std::exp((a - beta) * t)), 3.5 * se) << "t=" << t;
  }
}

TEST(Picard, TraceContractsFromSecondIteration) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.01, 0.2, 2.0);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(256, 1, grid, 6);
  PicardConfig cfg;
  cfg.M = 256;
  cfg.metric_stride = 10;
  const auto res = picard_solve(gm.spec, EmpiricalMeasure(inits), grid, cfg, 7);
  ASSERT_TRUE(res.converged);
  ASSERT_GE(res.trace.size(), 3u);
  for (std::size_t k = 2; k < res.trace.size(); ++k) EXPECT_LT(res.trace[k], res.trace[k - 1]);
}

TEST(Picard, CouplingMetricAboveExactCap) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.05, 0.1, 0.5);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(40, 1, grid, 6);
  PicardConfig cfg;
  cfg.M = 40;
  cfg.ot.max_atoms = 16;
  const auto res = picard_solve(gm.spec, EmpiricalMeasure(inits), grid, cfg, 7);
  EXPECT_FALSE(res.exact_metric);
  EXPECT_TRUE(res.converged);
}

TEST(Picard, NonConvergenceReportedNotThrown) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.05, 0.1, 1.0);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(32, 1, grid, 6);
  PicardConfig cfg;
  cfg.M = 32;
  cfg.max_iter = 1;
  cfg.tol = 1e-12;
  const auto res = picard_solve(gm.spec, EmpiricalMeasure(inits), grid, cfg, 7);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations(), 1u);
}

TEST(Picard, InvalidConfigRejected) {
  PicardConfig cfg;
  cfg.M = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Particles, SingleParticleIsSelfInteracting) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.01, 0.1, 1.0);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(1, 1, grid, 1);
  const NoiseStream stream{12, 0};
  auto own = particle_solve(gm.spec, inits, grid, {stream});
  const Mat states = own[0].states;
  const FrozenFlow flow = FrozenFlow::from_paths(grid, std::move(own));
  EXPECT_EQ(simulate_path(gm.spec, inits[0], flow, stream).states, states);
}

TEST(Particles, MatchesNaiveSynchronousUpdate) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.02, 0.1, 0.6);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(9, 1, grid, 2);
  const auto streams = make_streams(3, 9);
  const auto paths = particle_solve(gm.spec, inits, grid, streams);
  const auto naive = naive_particles(gm.spec, inits, grid, streams);
  for (std::size_t i = 0; i < paths.size(); ++i) EXPECT_EQ(paths[i].states, naive[i]);
}

TEST(Particles, PermutationEquivariant) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.02, 0.1, 0.6);
  auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(12, 1, grid, 2);
  auto streams = make_streams(3, 12);
  const auto base = particle_solve(gm.spec, inits, grid, streams);
  std::vector<std::size_t> perm = {5, 2, 11, 0, 7, 1, 9, 3, 10, 4, 8, 6};
  std::vector<Segment> pi;
  std::vector<NoiseStream> ps;
  for (auto j : perm) {
    pi.push_back(inits[j]);
    ps.push_back(streams[j]);
  }
  const auto permuted = particle_solve(gm.spec, pi, grid, ps);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    // The law is a sum over atoms, so reordering may change the last bits of floating point sums.
    EXPECT_LT((permuted[i].states - base[perm[i]].states).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Particles, ThreadCountInvariant) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.02, 0.1, 0.6);
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(33, 1, grid, 2);
  set_thread_count(1);
  const auto a = particle_solve(gm.spec, inits, grid, make_streams(3, 33));
  set_thread_count(4);
  const auto b = particle_solve(gm.spec, inits, grid, make_streams(3, 33));
  set_thread_count(0);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].states, b[i].states);
}

TEST(Particles, MeanWithinCltBandOfOde) {
  const double beta = 1.0, a = 0.5;
  const auto gm = linear_kinetic_delay({{"beta", beta}, {"kappa", 0.0}, {"a", a}, {"c", 0.0}});
  const auto grid = TimeGrid::from_durations(0.01, 0.0, 1.0);
  const std::size_t N = 512;
  const auto inits = InitialLaw::isotropic(2, 1.0, 1.0).sample(N, 1, grid, 8);
  auto paths = particle_solve(gm.spec, inits, grid, make_streams(9, N));
  const FrozenFlow flow = FrozenFlow::from_paths(grid, std::move(paths));
  const auto [mean, se] = y_mean_se(flow.at(grid.n_steps()));
  EXPECT_LE(std::abs(mean - std::exp((a - beta) * 1.0)), 5.0 * se);
}

TEST(Chaos, MeasureIndependentErrorIsZero) {
  const auto gm = linear_kinetic_delay({{"a", 0.0}, {"c", 0.3}});
  const auto grid = TimeGrid::from_durations(0.02, 0.1, 0.5);
  ChaosConfig cfg;
  cfg.Ns = {4, 8};
  cfg.M_ref = 32;
  cfg.replicates = 2;
  const auto rep = chaos_experiment(gm.spec, InitialLaw::isotropic(2, 1.0, 1.0), grid, cfg);
  for (const auto& r : rep.records) {
    EXPECT_EQ(r.error, 0.0);
    EXPECT_EQ(r.std_error, 0.0);
  }
}

TEST(Chaos, ReportShapeAndTails) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.02, 0.1, 0.5);
  ChaosConfig cfg;
  cfg.Ns = {4, 8, 16};
  cfg.M_ref = 64;
  cfg.replicates = 3;
  const auto rep = chaos_experiment(gm.spec, InitialLaw::isotropic(2, 1.0, 1.0), grid, cfg);
  ASSERT_EQ(rep.records.size(), 3u);
  EXPECT_TRUE(rep.reference_converged);
  EXPECT_TRUE(std::isfinite(rep.slope));
  for (const auto& r : rep.records) {
    EXPECT_GT(r.error, 0.0);
    ASSERT_EQ(r.ui_tail.size(), rep.ui_thresholds.size());
    for (std::size_t j = 1; j < r.ui_tail.size(); ++j) EXPECT_LE(r.ui_tail[j], r.ui_tail[j - 1]);
  }
}

TEST(Chaos, ValidatesConfig) {
  const auto gm = linear_kinetic_delay(kCoupled);
  const auto grid = TimeGrid::from_durations(0.1, 0.0, 0.5);
  const auto law = InitialLaw::isotropic(2, 1.0, 1.0);
  ChaosConfig cfg;
  cfg.Ns = {8, 4};
  EXPECT_THROW(chaos_experiment(gm.spec, law, grid, cfg), ConfigError);
  cfg.Ns = {4, 8};
  cfg.M_ref = 8;
  EXPECT_THROW(chaos_experiment(gm.spec, law, grid, cfg), ConfigError);
  cfg.M_ref = 16;
  cfg.theta = 1.5;
  EXPECT_THROW(chaos_experiment(measure_diffusion().spec, law, grid, cfg), ConfigError);
}

TEST(LogLogSlope, ExactPowerLaw) {
  EXPECT_NEAR(loglog_slope({2, 8, 32}, {3.0 / std::sqrt(2.0), 3.0 / std::sqrt(8.0), 3.0 / std::sqrt(32.0)}), -0.5, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({1, 2}, {1.0, 0.0})));
}
