#pragma once

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfh/measure.hpp"
#include "mfh/segments.hpp"

namespace mfh {

/// Column-per-time window passed to path-dependent coefficients without copying.
using SegmentRef = Eigen::Ref<const Mat>;

/// Declared regularity constants. They are inputs to the certificates, never estimated.
struct LipschitzConstants {
  double K_Z = 0.0;
  double K_B = 0.0;
  double K_sigma = 0.0;
  double C_H = 0.0;
};

/// Coefficients of the general path-distribution dependent system
///
///   dX = (b + bhat)(t, X(t), L) dt + (0, B(t, X_t, L)) dt + (0, sigma(t, X(t), L) dW)
///
/// Coefficients see the law only through `functionals`, a fixed vector of
/// measure statistics computed once per measure. Empty coefficient slots are zero;
/// an empty `functionals` marks the model as measure independent.
///
/// Coefficient callables must be pure: they are invoked concurrently.
struct ModelSpec {
  using Features = Vec;
  using StateFn = std::function<Vec(double t, const Vec& x, const Features& law)>;
  using PathFn = std::function<Vec(double t, const SegmentRef& seg, const Features& law)>;
  using DiffusionFn = std::function<Mat(double t, const Vec& x, const Features& law)>;
  using Functionals = std::function<Features(const EmpiricalMeasure&)>;

  std::string name;
  std::size_t m = 1;
  std::size_t d = 1;
  double theta = 2.0;
  Functionals functionals;
  StateFn drift_b;
  StateFn drift_bhat;
  PathFn drift_B;
  DiffusionFn diffusion_sigma;
  LipschitzConstants lip;
  bool sigma_depends_on_measure = false;

  std::size_t dim() const { return m + d; }
  bool measure_dependent() const { return static_cast<bool>(functionals); }
  Features summarize(const EmpiricalMeasure& mu) const { return functionals ? functionals(mu) : Features(); }
  void validate() const {
    if (m == 0 || d == 0) throw ConfigError("model dimensions m and d must be >= 1");
    if (!(theta >= 1.0)) throw ConfigError("model theta must be >= 1");
    if (!diffusion_sigma) throw ConfigError("model has no diffusion coefficient");
  }
};

namespace detail {
inline void require_finite(const Vec& v, std::size_t expected, const char* coefficient) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw ShapeError(std::string("coefficient ") + coefficient + " returned a vector of wrong size");
  }
  if (!v.allFinite()) throw NumericError(std::string("coefficient ") + coefficient + " returned a non-finite value");
}
}  // namespace detail

/// b + bhat + (0 (+) B); B contributes only to the last d coordinates.
inline Vec eval_drift(const ModelSpec& spec, double t, const Vec& state, const SegmentRef& seg,
                      const ModelSpec::Features& law) {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(spec.dim()));
  if (spec.drift_b) {
    Vec b = spec.drift_b(t, state, law);
    detail::require_finite(b, spec.dim(), "b");
    out += b;
  }
  if (spec.drift_bhat) {
    Vec bhat = spec.drift_bhat(t, state, law);
    detail::require_finite(bhat, spec.dim(), "bhat");
    out += bhat;
  }
  if (spec.drift_B) {
    Vec B = spec.drift_B(t, seg, law);
    detail::require_finite(B, spec.d, "B");
    out.tail(static_cast<Eigen::Index>(spec.d)) += B;
  }
  return out;
}

inline Vec eval_drift(const ModelSpec& spec, double t, const Vec& state, const Segment& seg,
                      const EmpiricalMeasure& mu) {
  return eval_drift(spec, t, state, seg.values(), spec.summarize(mu));
}

inline Mat eval_diffusion(const ModelSpec& spec, double t, const Vec& state, const ModelSpec::Features& law) {
  Mat sigma = spec.diffusion_sigma(t, state, law);
  if (static_cast<std::size_t>(sigma.rows()) != spec.d || static_cast<std::size_t>(sigma.cols()) != spec.d) {
    throw ShapeError("coefficient sigma must be d x d");
  }
  if (!sigma.allFinite()) throw NumericError("coefficient sigma returned a non-finite value");
  return sigma;
}

inline Mat eval_diffusion(const ModelSpec& spec, double t, const Vec& state, const EmpiricalMeasure& mu) {
  return eval_diffusion(spec, t, state, spec.summarize(mu));
}

/// Structured system dX = (AX + MY)dt, dY = (Z(X(t), Y(t), L) + B(X_t, Y_t, L))dt + sigma dW.
struct HamiltonianForm {
  using Features = ModelSpec::Features;

  Mat A;
  Mat M;
  Mat sigma;
  ModelSpec::Functionals functionals;
  std::function<Vec(const Vec& z, const Features& law)> Z;
  std::function<Vec(const SegmentRef& seg, const Features& law)> B;
  double K_Z = 0.0;
  double K_B = 0.0;

  std::size_t m() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(sigma.rows()); }
  Features summarize(const EmpiricalMeasure& mu) const { return functionals ? functionals(mu) : Features(); }

  /// Z + B at a state whose time-0 value is the last column of `seg`.
  Vec momentum_drift(const SegmentRef& seg, const Features& law) const {
    Vec out = Vec::Zero(static_cast<Eigen::Index>(d()));
    if (Z) out += Z(Vec(seg.col(seg.cols() - 1)), law);
    if (B) out += B(seg, law);
    return out;
  }

  ModelSpec to_model_spec(double theta, std::string name = "hamiltonian") const {
    if (A.rows() != A.cols() || M.rows() != A.rows() || sigma.rows() != sigma.cols() ||
        M.cols() != sigma.rows()) {
      throw ShapeError("hamiltonian form: inconsistent A, M, sigma shapes");
    }
    ModelSpec spec;
    spec.name = std::move(name);
    spec.m = m();
    spec.d = d();
    spec.theta = theta;
    spec.functionals = functionals;
    spec.lip.K_Z = K_Z;
    spec.lip.K_B = K_B;
    const Mat a = A, mm = M, s = sigma;
    const auto z = Z;
    const auto md = static_cast<Eigen::Index>(m());
    const auto dd = static_cast<Eigen::Index>(d());
    spec.drift_b = [a, mm, z, md, dd](double, const Vec& x, const Features& law) {
      Vec out(md + dd);
      out.head(md) = a * x.head(md) + mm * x.tail(dd);
      out.tail(dd) = z ? z(x, law) : Vec::Zero(dd);
      return out;
    };
    if (B) {
      const auto b = B;
      spec.drift_B = [b](double, const SegmentRef& seg, const Features& law) { return b(seg, law); };
    }
    spec.diffusion_sigma = [s](double, const Vec&, const Features&) { return s; };
    return spec;
  }
};

struct DissipativityParams {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
  double r = 0.0;
};

/// Outcome of the controllability rank test. `satisfied == false` means hypoellipticity is violated.
struct RankConditionResult {
  bool satisfied = false;
  std::size_t k = 0;     // minimal k when satisfied
  std::size_t rank = 0;  // rank reached at the last k examined
};

inline std::size_t numerical_rank(const Mat& x) {
  if (x.size() == 0) return 0;
  Eigen::FullPivLU<Mat> lu(x);
  return static_cast<std::size_t>(lu.rank());
}

/// Smallest k in [0, m-1] with Rank[M, AM, ..., A^k M] = m.
inline RankConditionResult check_rank_condition(const Mat& A, const Mat& M) {
  if (A.rows() != A.cols() || M.rows() != A.rows() || A.rows() == 0 || M.cols() == 0) {
    throw ShapeError("check_rank_condition: A must be m x m and M must be m x d");
  }
  const auto m = static_cast<std::size_t>(A.rows());
  Mat krylov = M;
  Mat power = M;
  RankConditionResult result;
  for (std::size_t k = 0; k < m; ++k) {
    if (k > 0) {
      power = A * power;
      Mat next(krylov.rows(), krylov.cols() + power.cols());
      next << krylov, power;
      krylov = std::move(next);
    }
    result.rank = numerical_rank(krylov);
    if (result.rank == m) {
      result.satisfied = true;
      result.k = k;
      return result;
    }
  }
  result.k = m - 1;
  return result;
}

/// sup over delta in [0, lambda1] of delta * exp(-delta * r), in closed form.
inline double sup_delta_exp(double lambda1, double r) {
  if (!(lambda1 > 0.0)) throw DomainError("sup_delta_exp: lambda1 must be positive");
  if (r < 0.0) throw DomainError("sup_delta_exp: r must be nonnegative");
  if (r == 0.0) return lambda1;
  if (lambda1 <= 1.0 / r) return lambda1 * std::exp(-lambda1 * r);
  return std::exp(-1.0) / r;
}

inline bool check_condition_C(const DissipativityParams& p) {
  if (!(p.lambda1 > 0.0) || p.lambda2 < 0.0 || p.lambda3 < 0.0 || p.r < 0.0) {
    throw DomainError("condition (C): need lambda1 > 0 and lambda2, lambda3, r >= 0");
  }
  return p.lambda2 + p.lambda3 <= sup_delta_exp(p.lambda1, p.r);
}

struct DissipativityCounterexample {
  std::size_t trial = 0;
  Segment xi;
  Segment xi_bar;
  EmpiricalMeasure gamma;
  EmpiricalMeasure gamma_bar;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of the dissipativity inequality for one input tuple.
inline std::pair<double, double> condition_C_sides(const HamiltonianForm& ham, const DissipativityParams& p,
                                                   const Segment& xi, const Segment& xi_bar,
                                                   const EmpiricalMeasure& gamma, const EmpiricalMeasure& gamma_bar) {
  const auto m = static_cast<Eigen::Index>(ham.m());
  const auto d = static_cast<Eigen::Index>(ham.d());
  const Vec diff = xi.current() - xi_bar.current();
  const Vec dx = diff.head(m);
  const Vec dy = diff.tail(d);
  const auto law = ham.summarize(gamma);
  const auto law_bar = ham.summarize(gamma_bar);
  const Vec momentum = ham.momentum_drift(xi.values(), law) - ham.momentum_drift(xi_bar.values(), law_bar);
  const double lhs = (ham.A * dx + ham.M * dy).dot(dx) + momentum.dot(dy);
  const double path = segment_distance(xi, xi_bar);
  const double w2 = p.lambda3 > 0.0 ? wasserstein_exact(gamma, gamma_bar, 2.0) : 0.0;
  const double rhs = -p.lambda1 * diff.squaredNorm() + p.lambda2 * path * path + p.lambda3 * w2 * w2;
  return {lhs, rhs};
}

/// Random search for a violation of the claimed dissipativity constants. A returned
/// tuple refutes the claim; an empty result proves nothing.
inline std::optional<DissipativityCounterexample> falsify_condition_C_by_sampling(const HamiltonianForm& ham,
                                                                                 const DissipativityParams& p,
                                                                                 std::size_t n_trials,
                                                                                 std::uint64_t seed,
                                                                                 std::size_t n_lag = 4) {
  const std::size_t m = ham.m();
  const std::size_t d = ham.d();
  const auto dim = static_cast<Eigen::Index>(m + d);
  const auto width = static_cast<Eigen::Index>(n_lag + 1);
  CounterRng rng(seed);
  auto scale = [&] { return std::pow(10.0, 4.0 * rng.uniform() - 2.0); };
  auto random_values = [&](double s) {
    Mat values(dim, width);
    for (Eigen::Index j = 0; j < width; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) values(i, j) = s * rng.normal();
    }
    return values;
  };
  auto random_measure = [&](std::size_t atoms, double s) {
    std::vector<Segment> out;
    for (std::size_t a = 0; a < atoms; ++a) out.emplace_back(random_values(s), m, d);
    return EmpiricalMeasure(out);
  };

  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    const double s = scale();
    Segment xi(random_values(s), m, d);
    // Mix independent pairs with near pairs and shared measures so each term is probed in isolation.
    const auto mode = rng.index(3);
    Segment xi_bar = mode == 1 ? Segment(xi.values() + random_values(scale() * 1e-2), m, d)
                               : Segment(random_values(s), m, d);
    const std::size_t atoms = 1 + rng.index(4);
    EmpiricalMeasure gamma = random_measure(atoms, scale());
    EmpiricalMeasure gamma_bar = mode == 2 ? gamma : random_measure(atoms, scale());
    const auto [lhs, rhs] = condition_C_sides(ham, p, xi, xi_bar, gamma, gamma_bar);
    if (lhs - rhs > 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs))) {
      return DissipativityCounterexample{trial, std::move(xi), std::move(xi_bar), std::move(gamma),
                                         std::move(gamma_bar), lhs, rhs};
    }
  }
  return std::nullopt;
}

/// 2-norm condition number of sigma; infinity when singular.
inline double condition_number(const Mat& sigma) {
  Eigen::JacobiSVD<Mat> svd(sigma);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return std::numeric_limits<double>::infinity();
  const double smallest = sv(sv.size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smallest;
}

/// Operator 2-norm.
inline double operator_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues()(0);
}

}  // namespace mfh
