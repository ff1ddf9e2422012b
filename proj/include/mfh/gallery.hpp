#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "mfh/model.hpp"

namespace mfh {

using ParamMap = std::map<std::string, double>;

/// A built-in model: the general form plus, when it exists, the structured form.
struct GalleryModel {
  std::string id;
  ModelSpec spec;
  std::optional<HamiltonianForm> hamiltonian;
};

namespace detail {

class ParamReader {
 public:
  ParamReader(const std::string& id, const ParamMap& params, std::set<std::string> allowed)
      : id_(id), params_(params) {
    for (const auto& [key, value] : params) {
      if (!allowed.count(key)) throw ConfigError("model '" + id + "': unknown parameter '" + key + "'");
      if (!std::isfinite(value)) throw ConfigError("model '" + id + "': parameter '" + key + "' is not finite");
    }
  }
  double get(const std::string& key, double fallback) const {
    const auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }
  std::size_t dim() const {
    const double v = get("dim", 1.0);
    if (v < 1.0 || v != std::floor(v)) throw ConfigError("model '" + id_ + "': dim must be a positive integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::string id_;
  const ParamMap& params_;
};

inline ModelSpec::Functionals mean_momentum_functional(std::size_t d) {
  return [d](const EmpiricalMeasure& mu) -> Vec { return mean_current(mu).tail(static_cast<Eigen::Index>(d)); };
}

}  // namespace detail

/// Kinetic linear model with mean-field coupling and a discrete delay:
///   dX = (-alpha X + s Y) dt,
///   dY = (-beta Y - kappa X + a E[Y(t)] + c Y(t - r)) dt + sigma dW.
/// Parameters: dim, alpha, s, beta, kappa, a, c, sigma, theta.
inline GalleryModel linear_kinetic_delay(const ParamMap& params = {}) {
  const detail::ParamReader p("linear_kinetic_delay", params,
                              {"dim", "alpha", "s", "beta", "kappa", "a", "c", "sigma", "theta"});
  const std::size_t n = p.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  const double alpha = p.get("alpha", 0.0), s = p.get("s", 1.0), beta = p.get("beta", 1.0);
  const double kappa = p.get("kappa", 0.0), a = p.get("a", 0.5), c = p.get("c", 0.0);
  const double sigma = p.get("sigma", 1.0), theta = p.get("theta", 2.0);

  HamiltonianForm ham;
  ham.A = -alpha * Mat::Identity(ni, ni);
  ham.M = s * Mat::Identity(ni, ni);
  ham.sigma = sigma * Mat::Identity(ni, ni);
  if (a != 0.0) ham.functionals = detail::mean_momentum_functional(n);
  ham.Z = [=](const Vec& z, const Vec& law) -> Vec {
    Vec out = -beta * z.tail(ni) - kappa * z.head(ni);
    if (a != 0.0) out += a * law;
    return out;
  };
  if (c != 0.0) {
    ham.B = [=](const SegmentRef& seg, const Vec&) -> Vec { return c * seg.col(0).tail(ni); };
  }
  ham.K_Z = std::max(std::abs(beta) + std::abs(kappa), std::abs(a));
  ham.K_B = std::abs(c);
  GalleryModel model{"linear_kinetic_delay", ham.to_model_spec(theta, "linear_kinetic_delay"), ham};
  return model;
}

/// Dissipativity constants implied by Young's inequality for linear_kinetic_delay;
/// empty when the bound gives lambda1 <= 0.
inline std::optional<DissipativityParams> linear_kinetic_dissipativity(const ParamMap& params, double r) {
  const detail::ParamReader p("linear_kinetic_delay", params,
                              {"dim", "alpha", "s", "beta", "kappa", "a", "c", "sigma", "theta"});
  const double cross = std::abs(p.get("s", 1.0) - p.get("kappa", 0.0)) / 2.0;
  const double a = std::abs(p.get("a", 0.5)), c = std::abs(p.get("c", 0.0));
  const double lambda1 = std::min(p.get("alpha", 0.0) - cross, p.get("beta", 1.0) - cross - a / 2.0 - c / 2.0);
  if (!(lambda1 > 0.0)) return std::nullopt;
  return DissipativityParams{lambda1, c / 2.0, a / 2.0, r};
}

/// Kinetic model with a Hoelder restoring force in the position block:
///   b = (Y, -kappa sgn(X)|X|^h - beta Y), bhat = (0, a E[Y(t)]), sigma constant.
/// Parameters: dim, h in (2/3, 1], kappa, beta, a, sigma, theta.
inline GalleryModel holder_kinetic(const ParamMap& params = {}) {
  const detail::ParamReader p("holder_kinetic", params, {"dim", "h", "kappa", "beta", "a", "sigma", "theta"});
  const std::size_t n = p.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  const double h = p.get("h", 0.8), kappa = p.get("kappa", 1.0), beta = p.get("beta", 1.0);
  const double a = p.get("a", 0.5), sigma = p.get("sigma", 1.0);
  if (!(h > 2.0 / 3.0 && h <= 1.0)) throw ConfigError("holder_kinetic: exponent h must lie in (2/3, 1]");

  ModelSpec spec;
  spec.name = "holder_kinetic";
  spec.m = n;
  spec.d = n;
  spec.theta = p.get("theta", 2.0);
  spec.drift_b = [=](double, const Vec& x, const Vec&) -> Vec {
    Vec out(2 * ni);
    out.head(ni) = x.tail(ni);
    for (Eigen::Index i = 0; i < ni; ++i) {
      const double q = x(i);
      out(ni + i) = -kappa * std::copysign(std::pow(std::abs(q), h), q) - beta * x(ni + i);
    }
    return out;
  };
  if (a != 0.0) {
    spec.functionals = detail::mean_momentum_functional(n);
    spec.drift_bhat = [=](double, const Vec&, const Vec& law) -> Vec {
      Vec out = Vec::Zero(2 * ni);
      out.tail(ni) = a * law;
      return out;
    };
  }
  const Mat sig = sigma * Mat::Identity(ni, ni);
  spec.diffusion_sigma = [sig](double, const Vec&, const Vec&) { return sig; };
  spec.lip.C_H = std::max({std::abs(kappa), std::abs(beta), std::abs(a)});
  return GalleryModel{"holder_kinetic", spec, std::nullopt};
}

/// Linear kinetic drift with a law-dependent noise level
///   sigma(mu) = sigma0 (1 + min(1, mu(||.||^theta)^(1/theta))) I.
/// The theta-th root of the moment is W_theta-Lipschitz. Requires theta >= 2.
/// Parameters: dim, kappa, beta, a, sigma, theta.
inline GalleryModel measure_diffusion(const ParamMap& params = {}) {
  const detail::ParamReader p("measure_diffusion", params, {"dim", "kappa", "beta", "a", "sigma", "theta"});
  const std::size_t n = p.dim();
  const auto ni = static_cast<Eigen::Index>(n);
  const double kappa = p.get("kappa", 1.0), beta = p.get("beta", 1.0), a = p.get("a", 0.0);
  const double sigma0 = p.get("sigma", 1.0), theta = p.get("theta", 2.0);
  if (theta < 2.0) throw ConfigError("measure_diffusion: theta must be >= 2 for law-dependent diffusion");

  ModelSpec spec;
  spec.name = "measure_diffusion";
  spec.m = n;
  spec.d = n;
  spec.theta = theta;
  spec.sigma_depends_on_measure = true;
  spec.functionals = [=](const EmpiricalMeasure& mu) -> Vec {
    Vec law(1 + ni);
    law(0) = std::pow(moment(mu, theta), 1.0 / theta);
    law.tail(ni) = mean_current(mu).tail(ni);
    return law;
  };
  spec.drift_b = [=](double, const Vec& x, const Vec& law) -> Vec {
    Vec out(2 * ni);
    out.head(ni) = x.tail(ni);
    out.tail(ni) = -kappa * x.head(ni) - beta * x.tail(ni) + a * law.tail(ni);
    return out;
  };
  spec.diffusion_sigma = [=](double, const Vec&, const Vec& law) -> Mat {
    return sigma0 * (1.0 + std::min(1.0, law(0))) * Mat::Identity(ni, ni);
  };
  spec.lip.K_sigma = std::abs(sigma0);
  spec.lip.C_H = std::max({std::abs(kappa), std::abs(beta), std::abs(a), std::abs(sigma0)});
  return GalleryModel{"measure_diffusion", spec, std::nullopt};
}

inline GalleryModel make_gallery_model(const std::string& id, const ParamMap& params = {}) {
  if (id == "linear_kinetic_delay") return linear_kinetic_delay(params);
  if (id == "holder_kinetic") return holder_kinetic(params);
  if (id == "measure_diffusion") return measure_diffusion(params);
  throw ConfigError("unknown model id '" + id + "'");
}

}  // namespace mfh
