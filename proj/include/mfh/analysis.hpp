#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "mfh/meanfield.hpp"
#include "mfh/measure.hpp"
#include "mfh/model.hpp"
#include "mfh/solver.hpp"

namespace mfh {

// ---------------------------------------------------------------------------
// Ergodicity rate
// ---------------------------------------------------------------------------

struct ErgodicityOptions {
  std::size_t report_every = 10;
  /// Fit window is [fit_start * T, T].
  double fit_start = 0.5;
};

struct ErgodicityReport {
  std::vector<double> times;
  std::vector<double> w2_curve;
  /// Root mean squared distance of the index-aligned (synchronous) coupling.
  std::vector<double> coupling_curve;
  double kappa_hat = 0.0;
  double c_hat = 0.0;
  double fit_r2 = 0.0;
  /// Set when the fit window holds fewer than two positive distances; kappa_hat is then +inf.
  bool degenerate = false;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

namespace detail {
inline std::vector<Segment> draw_atoms(const EmpiricalMeasure& mu, std::size_t n, std::uint64_t seed) {
  std::vector<Segment> out;
  out.reserve(n);
  if (mu.size() == n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(mu.segment(i));
    return out;
  }
  CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) out.push_back(mu.segment(rng.index(mu.size())));
  return out;
}
}  // namespace detail

/// Evolves two N-particle systems from mu0 and nu0 and fits the exponential decay of
/// W_2 between their segment laws over the tail of the horizon.
inline ErgodicityReport contraction_rate(const ModelSpec& spec, const EmpiricalMeasure& mu0,
                                         const EmpiricalMeasure& nu0, const TimeGrid& grid, std::size_t N,
                                         bool shared_noise, std::uint64_t seed, const ErgodicityOptions& opts = {},
                                         const SolverOptions& options = {}) {
  if (N == 0) throw ConfigError("contraction_rate: N must be positive");
  if (opts.report_every == 0) throw ConfigError("contraction_rate: report_every must be positive");
  const auto inits_mu = detail::draw_atoms(mu0, N, derive_seed(seed, "ergodicity-init-mu"));
  const auto inits_nu = detail::draw_atoms(nu0, N, derive_seed(seed, "ergodicity-init-nu"));
  const auto streams_mu = make_streams(derive_seed(seed, "ergodicity-noise"), N);
  const auto streams_nu = shared_noise ? streams_mu : make_streams(derive_seed(seed, "ergodicity-noise-nu"), N);
  auto paths_mu = particle_solve(spec, inits_mu, grid, streams_mu, options);
  auto paths_nu = particle_solve(spec, inits_nu, grid, streams_nu, options);
  const FrozenFlow flow_mu = FrozenFlow::from_paths(grid, std::move(paths_mu));
  const FrozenFlow flow_nu = FrozenFlow::from_paths(grid, std::move(paths_nu));

  ErgodicityReport report;
  std::vector<std::size_t> steps;
  for (std::size_t k = 0; k <= grid.n_steps(); k += opts.report_every) steps.push_back(k);
  if (steps.back() != grid.n_steps()) steps.push_back(grid.n_steps());
  for (auto step : steps) {
    report.times.push_back(grid.time(step));
    report.w2_curve.push_back(wasserstein_exact(flow_mu.at(step), flow_nu.at(step), 2.0));
    report.coupling_curve.push_back(coupling_cost(flow_mu.at(step), flow_nu.at(step), 2.0));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    if (report.times[i] >= opts.fit_start * grid.T() && report.w2_curve[i] > 0.0) {
      xs.push_back(report.times[i]);
      ys.push_back(std::log(report.w2_curve[i]));
    }
  }
  if (xs.size() < 2) {
    report.degenerate = true;
    report.kappa_hat = std::numeric_limits<double>::infinity();
    return report;
  }
  const LinearFit fit = least_squares(xs, ys);
  report.kappa_hat = -fit.slope;
  report.fit_r2 = fit.r2;
  report.c_hat = report.w2_curve.front() > 0.0 ? std::exp(fit.intercept) / report.w2_curve.front() : 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Change-of-measure certificate
// ---------------------------------------------------------------------------

struct GirsanovCertificate {
  double E_R = 0.0;
  double se_R = 0.0;
  double E_RlogR = 0.0;
  double se_RlogR = 0.0;
  /// E[R_T * (1/2) int |gamma|^2 ds], the Q-expectation of half the energy.
  double half_int_gamma_sq_under_Q = 0.0;
  double se_half_int_gamma_sq = 0.0;
  double gamma_sup = 0.0;
  double effective_sample_size = 0.0;
  /// Effective sample size below 10.
  bool degenerate = false;
  std::size_t n_paths = 0;
};

/// Simulates paths under the frozen flow mu and accumulates the density
/// R_T = exp(-int <gamma, dW> - 1/2 int |gamma|^2 ds) that turns the drift under mu into
/// the drift under nu, with gamma = sigma^{-1}[(Z + B)(., mu) - (Z + B)(., nu)].
inline GirsanovCertificate girsanov_certificate(const HamiltonianForm& ham, const FrozenFlow& flow_mu,
                                                const FrozenFlow& flow_nu, std::size_t n_paths, std::uint64_t seed,
                                                const SolverOptions& options = {}) {
  if (!(flow_mu.grid() == flow_nu.grid())) throw ShapeError("girsanov_certificate: flows on different grids");
  if (n_paths < 2) throw ConfigError("girsanov_certificate: need at least two paths");
  if (!std::isfinite(condition_number(ham.sigma))) throw DomainError("girsanov_certificate: sigma is not invertible");
  const TimeGrid& grid = flow_mu.grid();
  const ModelSpec spec = ham.to_model_spec(2.0);
  const Mat sigma_inv = ham.sigma.inverse();
  const auto laws_mu = flow_mu.summaries(spec);
  const auto laws_nu = flow_nu.summaries(spec);
  const auto inits = detail::draw_atoms(flow_mu.at(0), n_paths, derive_seed(seed, "girsanov-init"));
  const auto streams = make_streams(derive_seed(seed, "girsanov-noise"), n_paths);

  std::vector<double> log_r(n_paths), energy(n_paths), sup_gamma(n_paths);
  parallel_for(n_paths, [&](std::size_t p) {
    PathRecord path = detail::start_path(inits[p], grid);
    double stoch = 0.0, en = 0.0, gsup = 0.0;
    for (std::size_t step = 0; step < grid.n_steps(); ++step) {
      const auto window = path.window(step);
      const Vec gamma =
          sigma_inv * (ham.momentum_drift(window, laws_mu[step]) - ham.momentum_drift(window, laws_nu[step]));
      const Vec dW = streams[p].increments(step, spec.d, grid.dt());
      stoch += gamma.dot(dW);
      en += gamma.squaredNorm() * grid.dt();
      gsup = std::max(gsup, gamma.norm());
      Vec next = euler_step(spec, grid.time(step), grid.dt(), window, laws_mu[step], dW);
      detail::guard_state(next, options, step + 1, p);
      path.states.col(path.column(step + 1)) = next;
    }
    log_r[p] = -stoch - 0.5 * en;
    energy[p] = en;
    sup_gamma[p] = gsup;
  });

  GirsanovCertificate cert;
  cert.n_paths = n_paths;
  const double n = static_cast<double>(n_paths);
  auto mean_se = [n](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / (n - 1.0) / n)};
  };
  std::vector<double> r(n_paths), rlogr(n_paths), weighted(n_paths);
  double sum_r = 0.0, sum_r2 = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    r[p] = std::exp(log_r[p]);
    rlogr[p] = r[p] * log_r[p];
    weighted[p] = r[p] * 0.5 * energy[p];
    sum_r += r[p];
    sum_r2 += r[p] * r[p];
    cert.gamma_sup = std::max(cert.gamma_sup, sup_gamma[p]);
  }
  std::tie(cert.E_R, cert.se_R) = mean_se(r);
  std::tie(cert.E_RlogR, cert.se_RlogR) = mean_se(rlogr);
  std::tie(cert.half_int_gamma_sq_under_Q, cert.se_half_int_gamma_sq) = mean_se(weighted);
  cert.effective_sample_size = sum_r2 > 0.0 ? sum_r * sum_r / sum_r2 : 0.0;
  cert.degenerate = cert.effective_sample_size < 10.0;
  return cert;
}

/// max over grid steps (every `stride`, final step included) of W_theta between two flows.
inline double max_flow_distance(const FrozenFlow& a, const FrozenFlow& b, double theta, std::size_t stride = 1) {
  if (!(a.grid() == b.grid())) throw ShapeError("max_flow_distance: flows on different grids");
  double best = 0.0;
  const std::size_t last = a.grid().n_steps();
  for (std::size_t k = 0;; k = std::min(k + stride, last)) {
    best = std::max(best, wasserstein_exact(a.at(k), b.at(k), theta));
    if (k == last) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Entropy certificate arithmetic
// ---------------------------------------------------------------------------

/// Sigma(T, r, ||M||, k) / C
///   = 1/((T-r) ^ 1) + ||M||/((T-r)^(4k+3) ^ 1) + (1 + ||M||/((T-r)^(2k+1) ^ 1))^2,
/// where ^ denotes the minimum.
inline double sigma_certificate(double T, double r, double M_norm, unsigned k) {
  if (!(T > r)) throw DomainError("sigma_certificate: requires T > r");
  if (M_norm < 0.0) throw DomainError("sigma_certificate: ||M|| must be nonnegative");
  const double gap = T - r;
  const double p1 = std::min(gap, 1.0);
  const double p2 = std::min(std::pow(gap, 4.0 * k + 3.0), 1.0);
  const double p3 = std::min(std::pow(gap, 2.0 * k + 1.0), 1.0);
  const double tail = 1.0 + M_norm / p3;
  return (1.0 / p1 + M_norm / p2) + tail * tail;
}

/// int_0^T exp(2Ks) ds, with a series branch near K = 0.
inline double exp_integral(double K, double T) {
  if (std::abs(K) < 1e-8) return T + K * T * T + (2.0 / 3.0) * K * K * T * T * T;
  return std::expm1(2.0 * K * T) / (2.0 * K);
}

struct EntropyInputs {
  double sigma_inv_norm = 0.0;
  double K_Z = 0.0;
  double K_B = 0.0;
  double K = 0.0;
  double T = 1.0;
  double r = 0.0;
  double M_norm = 0.0;
  unsigned k = 0;
  double wtilde0 = 0.0;
  double w2_0 = 0.0;
};

struct EntropyCertificate {
  double first_term = 0.0;
  /// Second term divided by the unquantified constant C.
  double sigma_term_over_C = 0.0;
  EntropyInputs inputs;
};

inline EntropyCertificate entropy_bound(const EntropyInputs& in) {
  if (!(in.T > in.r)) throw DomainError("entropy_bound: requires T > r");
  for (double v : {in.sigma_inv_norm, in.K_Z, in.K_B, in.K, in.r, in.M_norm, in.wtilde0, in.w2_0}) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("entropy_bound: inputs must be finite and nonnegative");
  }
  EntropyCertificate cert;
  cert.inputs = in;
  const double lip = in.sigma_inv_norm * (in.K_Z + in.K_B);
  cert.first_term = lip * lip * exp_integral(in.K, in.T) * in.wtilde0 * in.wtilde0;
  cert.sigma_term_over_C = sigma_certificate(in.T, in.r, in.M_norm, in.k) * in.w2_0 * in.w2_0;
  return cert;
}

}  // namespace mfh
