#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfh/measure.hpp"
#include "mfh/model.hpp"
#include "mfh/noise.hpp"
#include "mfh/parallel.hpp"
#include "mfh/solver.hpp"

namespace mfh {

/// Initial law: constant segments whose value is N(mean, diag(stddev^2)).
struct InitialLaw {
  Vec mean;
  Vec stddev;

  static InitialLaw isotropic(std::size_t dim, double mean, double stddev) {
    return {Vec::Constant(static_cast<Eigen::Index>(dim), mean), Vec::Constant(static_cast<Eigen::Index>(dim), stddev)};
  }

  std::vector<Segment> sample(std::size_t n, std::size_t m, const TimeGrid& grid, std::uint64_t seed) const {
    if (mean.size() != stddev.size() || static_cast<std::size_t>(mean.size()) <= m) {
      throw ConfigError("initial law: mean and stddev must have dimension m + d");
    }
    CounterRng rng(seed);
    std::vector<Segment> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Vec x(mean.size());
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = mean(k) + stddev(k) * rng.normal();
      out.push_back(Segment::constant(x, m, grid.n_lag()));
    }
    return out;
  }
};

struct PicardConfig {
  std::size_t M = 1024;
  std::size_t max_iter = 30;
  double tol = 1e-3;
  /// Weight rate of the flow metric; negative selects the adaptive rule.
  double delta0 = -1.0;
  bool reuse_noise = true;
  /// Evaluate the flow metric every `metric_stride` grid steps (the final step is always included).
  std::size_t metric_stride = 1;
  ExactOtOptions ot;

  void validate() const {
    if (M < 2) throw ConfigError("picard: ensemble size M must be >= 2");
    if (!(tol > 0.0)) throw ConfigError("picard: tol must be positive");
    if (max_iter < 1) throw ConfigError("picard: max_iter must be >= 1");
    if (metric_stride < 1) throw ConfigError("picard: metric_stride must be >= 1");
  }
};

struct PicardResult {
  FrozenFlow flow;
  /// Weighted metric sup_t exp(-delta0 t) W_theta(flow^{k-1}_t, flow^k_t) for k = 1, 2, ...
  std::vector<double> trace;
  /// Unweighted distance curves, one per iteration, at `metric_steps`.
  std::vector<std::vector<double>> curves;
  std::vector<std::size_t> metric_steps;
  double delta0 = 0.0;
  bool converged = false;
  /// True when distances are exact OT; false when M exceeds the exact cap and the
  /// index-aligned coupling cost (an upper bound) is used instead.
  bool exact_metric = true;
  std::vector<Segment> inits;

  std::size_t iterations() const { return trace.size(); }
};

namespace detail {

inline double weighted_sup(const std::vector<double>& curve, const std::vector<std::size_t>& steps,
                           const TimeGrid& grid, double delta0) {
  double best = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    best = std::max(best, std::exp(-delta0 * grid.time(steps[i])) * curve[i]);
  }
  return best;
}

/// Least-squares slope of log(curve) against time over positive entries.
inline double log_growth_rate(const std::vector<double>& curve, const std::vector<std::size_t>& steps,
                              const TimeGrid& grid) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!(curve[i] > 0.0)) continue;
    const double x = grid.time(steps[i]), y = std::log(curve[i]);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom <= 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace detail

/// Fixed-point iteration flow^{k+1} = Phi(flow^k) on measure flows, where Phi simulates
/// cfg.M decoupled paths against the frozen flow and returns their segment laws.
/// Non-convergence is reported through `converged`, never thrown.
inline PicardResult picard_solve(const ModelSpec& spec, const EmpiricalMeasure& init, const TimeGrid& grid,
                                 const PicardConfig& cfg, std::uint64_t seed, const SolverOptions& options = {}) {
  spec.validate();
  cfg.validate();
  if (init.n_lag() != grid.n_lag() || init.m() != spec.m || init.d() != spec.d) {
    throw ShapeError("picard: initial measure does not match model dimensions or delay window");
  }
  PicardResult result;
  if (init.size() == cfg.M) {
    for (std::size_t i = 0; i < cfg.M; ++i) result.inits.push_back(init.segment(i));
  } else {
    CounterRng rng(derive_seed(seed, "picard-init"));
    for (std::size_t i = 0; i < cfg.M; ++i) result.inits.push_back(init.segment(rng.index(init.size())));
  }
  for (std::size_t k = 0; k <= grid.n_steps(); k += cfg.metric_stride) result.metric_steps.push_back(k);
  if (result.metric_steps.back() != grid.n_steps()) result.metric_steps.push_back(grid.n_steps());
  result.exact_metric = cfg.M <= cfg.ot.max_atoms;

  const bool adaptive = cfg.delta0 < 0.0;
  double delta0 = adaptive ? 0.0 : cfg.delta0;
  FrozenFlow current = FrozenFlow::constant(grid, EmpiricalMeasure(result.inits, spec.theta));
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    const std::uint64_t noise_seed = derive_seed(seed, "picard-noise", cfg.reuse_noise ? 0 : k);
    FrozenFlow next = FrozenFlow::from_paths(
        grid, simulate_ensemble(spec, result.inits, current, make_streams(noise_seed, cfg.M), options), spec.theta);
    std::vector<double> curve(result.metric_steps.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const std::size_t step = result.metric_steps[i];
      curve[i] = result.exact_metric ? wasserstein_exact(current.at(step), next.at(step), spec.theta, cfg.ot)
                                     : coupling_cost(current.at(step), next.at(step), spec.theta);
    }
    if (adaptive && k == 2) {
      // Twice the observed growth rate of one Phi-difference along time.
      delta0 = 2.0 * std::max(0.0, detail::log_growth_rate(curve, result.metric_steps, grid));
    }
    result.curves.push_back(std::move(curve));
    current = std::move(next);
    if (detail::weighted_sup(result.curves.back(), result.metric_steps, grid, delta0) < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.delta0 = delta0;
  for (const auto& c : result.curves) result.trace.push_back(detail::weighted_sup(c, result.metric_steps, grid, delta0));
  result.flow = std::move(current);
  return result;
}

/// N interacting particles with synchronous updates: every particle advances against
/// the empirical segment law formed from all particles before the step.
inline std::vector<PathRecord> particle_solve(const ModelSpec& spec, const std::vector<Segment>& inits,
                                              const TimeGrid& grid, const std::vector<NoiseStream>& streams,
                                              const SolverOptions& options = {}) {
  spec.validate();
  if (inits.empty()) throw ShapeError("particle_solve: need at least one particle");
  if (inits.size() != streams.size()) throw ShapeError("particle_solve: one noise stream per particle");
  const std::size_t n = inits.size();
  std::vector<PathRecord> paths(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (inits[i].m() != spec.m || inits[i].d() != spec.d) throw ShapeError("particle_solve: initial segment dimensions");
    paths[i] = detail::start_path(inits[i], grid);
  }
  // Measures read the particles' own storage through a shared store of states.
  auto store = std::make_shared<EmpiricalMeasure::Store>(n);
  for (std::size_t i = 0; i < n; ++i) (*store)[i] = std::move(paths[i].states);
  std::shared_ptr<const EmpiricalMeasure::Store> view = store;
  for (std::size_t step = 0; step < grid.n_steps(); ++step) {
    ModelSpec::Features law;
    if (spec.measure_dependent()) {
      law = spec.summarize(EmpiricalMeasure(view, static_cast<Eigen::Index>(step),
                                            static_cast<Eigen::Index>(grid.window()), spec.m, spec.d, spec.theta));
    }
    parallel_for(n, [&](std::size_t i) {
      PathRecord local{std::move((*store)[i]), spec.m, spec.d, grid.n_lag()};
      try {
        detail::advance(spec, grid, local, step, law, streams[i], options, i);
      } catch (...) {
        (*store)[i] = std::move(local.states);
        throw;
      }
      (*store)[i] = std::move(local.states);
    });
  }
  for (std::size_t i = 0; i < n; ++i) paths[i].states = std::move((*store)[i]);
  return paths;
}

struct ChaosConfig {
  std::vector<std::size_t> Ns = {8, 32, 128};
  std::size_t M_ref = 4096;
  std::size_t replicates = 8;
  double theta = 2.0;
  std::uint64_t master_seed = 0;
  PicardConfig reference;  // M is overridden by M_ref
  /// Multiples of the overall mean of ||X||^theta used as uniform-integrability thresholds.
  std::vector<double> ui_threshold_factors = {1.0, 2.0, 4.0, 8.0};
};

struct ChaosRecord {
  std::size_t N = 0;
  double error = 0.0;
  double std_error = 0.0;
  double wasserstein_gap = 0.0;
  std::vector<double> ui_tail;
};

struct ChaosReport {
  std::vector<ChaosRecord> records;
  double slope = std::numeric_limits<double>::quiet_NaN();
  /// W_theta between two disjoint halves of the reference endpoint law (bias proxy).
  double reference_bias = 0.0;
  std::vector<double> ui_thresholds;
  std::size_t reference_iterations = 0;
  bool reference_converged = false;
};

/// Least-squares slope of log(y) against log(x); NaN when any y <= 0 or fewer than two points.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    n += 1;
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace detail {
inline double sup_path_distance_pow(const PathRecord& a, const PathRecord& b, double theta) {
  double best = 0.0;
  for (std::size_t step = 0; step <= a.n_steps(); ++step) best = std::max(best, (a.state(step) - b.state(step)).norm());
  return cost_power(best, theta);
}

inline double sup_path_norm_pow(const PathRecord& a, double theta) {
  return cost_power(sup_norm(a.states), theta);
}

inline EmpiricalMeasure endpoint_law(const std::vector<PathRecord>& paths, const TimeGrid& grid, double theta) {
  std::vector<Segment> atoms;
  atoms.reserve(paths.size());
  for (const auto& p : paths) atoms.push_back(segment_at(p, grid.n_steps()));
  return EmpiricalMeasure(atoms, theta);
}
}  // namespace detail

/// Couples the non-interacting system (against a Picard reference law) with the
/// N-particle system through shared initial segments and noise, and measures
/// sup_i E sup_t |X^i - X^{i,N}|^theta as N grows.
inline ChaosReport chaos_experiment(const ModelSpec& spec, const InitialLaw& law, const TimeGrid& grid,
                                    const ChaosConfig& cfg, const SolverOptions& options = {}) {
  spec.validate();
  if (cfg.Ns.empty()) throw ConfigError("chaos: Ns must be nonempty");
  for (std::size_t i = 0; i < cfg.Ns.size(); ++i) {
    if (cfg.Ns[i] == 0 || (i > 0 && cfg.Ns[i] <= cfg.Ns[i - 1])) throw ConfigError("chaos: Ns must be strictly increasing and positive");
  }
  if (cfg.M_ref <= cfg.Ns.back()) throw ConfigError("chaos: M_ref must exceed max(Ns)");
  if (cfg.replicates < 1) throw ConfigError("chaos: need at least one replicate");
  if (cfg.theta < 1.0 || (spec.sigma_depends_on_measure && cfg.theta < 2.0)) {
    throw ConfigError("chaos: theta must be >= 2 for law-dependent diffusion and >= 1 otherwise");
  }

  ChaosReport report;
  PicardConfig ref_cfg = cfg.reference;
  ref_cfg.M = cfg.M_ref;
  const auto ref_inits = law.sample(cfg.M_ref, spec.m, grid, derive_seed(cfg.master_seed, "chaos-ref-init"));
  PicardResult ref = picard_solve(spec, EmpiricalMeasure(ref_inits, cfg.theta), grid, ref_cfg,
                                  derive_seed(cfg.master_seed, "chaos-ref"), options);
  report.reference_iterations = ref.iterations();
  report.reference_converged = ref.converged;
  const EmpiricalMeasure& ref_end = ref.flow.at(grid.n_steps());
  {
    const std::size_t half = std::min<std::size_t>(cfg.M_ref / 2, 512);
    std::vector<Segment> first, second;
    for (std::size_t i = 0; i < half; ++i) {
      first.push_back(ref_end.segment(i));
      second.push_back(ref_end.segment(cfg.M_ref / 2 + i));
    }
    report.reference_bias = wasserstein_exact(EmpiricalMeasure(first), EmpiricalMeasure(second), cfg.theta);
  }

  struct Replicate {
    double error = 0.0;
    double gap = 0.0;
    double mean_z = 0.0;
  };
  std::vector<std::vector<Replicate>> reps(cfg.Ns.size(), std::vector<Replicate>(cfg.replicates));
  double z_total = 0.0;
  std::size_t z_count = 0;
  for (std::size_t n_idx = 0; n_idx < cfg.Ns.size(); ++n_idx) {
    const std::size_t N = cfg.Ns[n_idx];
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      const std::uint64_t tag = N * 1000003ull + r;
      const auto inits = law.sample(N, spec.m, grid, derive_seed(cfg.master_seed, "chaos-init", tag));
      const auto streams = make_streams(derive_seed(cfg.master_seed, "chaos-noise", tag), N);
      const auto free_paths = simulate_ensemble(spec, inits, ref.flow, streams, options);
      const auto coupled = particle_solve(spec, inits, grid, streams, options);
      Replicate rep;
      for (std::size_t i = 0; i < N; ++i) {
        rep.error += detail::sup_path_distance_pow(free_paths[i], coupled[i], cfg.theta);
        const double z = detail::sup_path_norm_pow(free_paths[i], cfg.theta);
        rep.mean_z += z;
        z_total += z;
        ++z_count;
      }
      rep.error /= static_cast<double>(N);
      rep.mean_z /= static_cast<double>(N);
      rep.gap = wasserstein_exact(detail::endpoint_law(coupled, grid, cfg.theta),
                                  subsample(ref_end, N, derive_seed(cfg.master_seed, "chaos-gap", tag)), cfg.theta);
      reps[n_idx][r] = rep;
    }
  }

  const double z_mean = z_total / static_cast<double>(z_count);
  for (double f : cfg.ui_threshold_factors) report.ui_thresholds.push_back(f * z_mean);
  std::vector<double> xs, ys;
  for (std::size_t n_idx = 0; n_idx < cfg.Ns.size(); ++n_idx) {
    ChaosRecord rec;
    rec.N = cfg.Ns[n_idx];
    const auto R = static_cast<double>(cfg.replicates);
    for (const auto& rep : reps[n_idx]) {
      rec.error += rep.error / R;
      rec.wasserstein_gap += rep.gap / R;
    }
    double var = 0.0;
    for (const auto& rep : reps[n_idx]) var += (rep.error - rec.error) * (rep.error - rec.error);
    rec.std_error = cfg.replicates > 1 ? std::sqrt(var / (R - 1.0) / R) : 0.0;
    for (double threshold : report.ui_thresholds) {
      double tail = 0.0;
      for (const auto& rep : reps[n_idx]) tail += rep.mean_z >= threshold ? rep.mean_z / R : 0.0;
      rec.ui_tail.push_back(tail);
    }
    xs.push_back(static_cast<double>(rec.N));
    ys.push_back(rec.error);
    report.records.push_back(std::move(rec));
  }
  report.slope = loglog_slope(xs, ys);
  return report;
}

}  // namespace mfh
