#pragma once

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mfh/analysis.hpp"
#include "mfh/errors.hpp"
#include "mfh/gallery.hpp"
#include "mfh/meanfield.hpp"

namespace mfh::app {

using json = nlohmann::json;

inline const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> kinds = {"check", "simulate", "picard", "particles",
                                              "chaos", "ergodicity", "certify"};
  return kinds;
}

struct CheckSection {
  std::size_t n_trials = 10000;
  std::size_t n_lag = 4;
  std::optional<DissipativityParams> claim;
};

struct CertifySection {
  std::size_t n_paths = 10000;
  std::size_t M = 512;
  double K = 0.0;
  std::optional<double> wtilde0;
  unsigned k_override = 0;
  bool has_k_override = false;
  std::size_t metric_stride = 1;
};

/// Parsed experiment configuration. Unknown keys anywhere are rejected.
struct ExperimentConfig {
  std::string kind;
  std::string model_id;
  ParamMap model_params;
  double dt = 0.01, r = 0.0, T = 1.0;
  std::uint64_t seed = 0;
  std::string output = "results";
  std::optional<InitialLaw> init;
  std::optional<InitialLaw> init_alt;
  double blowup_bound = 1e12;

  CheckSection check;
  std::size_t simulate_paths = 16;
  PicardConfig picard;
  std::size_t particles_N = 0;
  ChaosConfig chaos;
  std::size_t ergodicity_N = 0;
  bool ergodicity_shared_noise = true;
  ErgodicityOptions ergodicity;
  CertifySection certify;

  json raw;

  TimeGrid grid() const { return TimeGrid::from_durations(dt, r, T); }
  GalleryModel model() const { return make_gallery_model(model_id, model_params); }
};

namespace detail {

inline void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

inline double number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

inline double number_or(const json& obj, const std::string& key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline std::size_t count(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + "." + key + " must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::size_t count_or(const json& obj, const std::string& key, const std::string& where, std::size_t fallback) {
  return obj.contains(key) ? count(obj, key, where) : fallback;
}

inline bool flag_or(const json& obj, const std::string& key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return obj.at(key).get<bool>();
}

inline const json& section(const json& root, const std::string& key) {
  if (!root.contains(key)) throw ConfigError("missing required section '" + key + "'");
  return root.at(key);
}

inline Vec vector_field(const json& v, std::size_t dim, const std::string& where) {
  if (v.is_number()) return Vec::Constant(static_cast<Eigen::Index>(dim), v.get<double>());
  if (!v.is_array() || v.size() != dim) throw ConfigError(where + " must be a number or an array of length m + d");
  Vec out(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (!v[i].is_number()) throw ConfigError(where + " entries must be numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

inline InitialLaw parse_law(const json& obj, const std::string& where, std::size_t dim) {
  only_keys(obj, where, {"mean", "std"});
  InitialLaw law;
  law.mean = obj.contains("mean") ? vector_field(obj.at("mean"), dim, where + ".mean")
                                  : Vec::Zero(static_cast<Eigen::Index>(dim));
  law.stddev = obj.contains("std") ? vector_field(obj.at("std"), dim, where + ".std")
                                   : Vec::Ones(static_cast<Eigen::Index>(dim));
  if ((law.stddev.array() < 0.0).any()) throw ConfigError(where + ".std must be nonnegative");
  return law;
}

inline PicardConfig parse_picard(const json& obj, const std::string& where, bool require_M) {
  only_keys(obj, where, {"M", "max_iter", "tol", "delta0", "reuse_noise", "metric_stride"});
  PicardConfig cfg;
  if (require_M && !obj.contains("M")) throw ConfigError(where + ".M is required");
  cfg.M = count_or(obj, "M", where, cfg.M);
  cfg.max_iter = count_or(obj, "max_iter", where, cfg.max_iter);
  cfg.tol = number_or(obj, "tol", where, cfg.tol);
  cfg.delta0 = number_or(obj, "delta0", where, cfg.delta0);
  cfg.reuse_noise = flag_or(obj, "reuse_noise", where, cfg.reuse_noise);
  cfg.metric_stride = count_or(obj, "metric_stride", where, cfg.metric_stride);
  return cfg;
}

}  // namespace detail

/// Parses and validates a configuration document. `cli_kind` must agree with the
/// document's "kind" when both are present.
inline ExperimentConfig parse_config(const json& root, const std::string& cli_kind = "") {
  using namespace detail;
  only_keys(root, "config", {"kind", "model", "grid", "theta", "seed", "output", "init", "init_alt", "solver", "check",
                             "simulate", "picard", "particles", "chaos", "ergodicity", "certify"});
  ExperimentConfig cfg;
  cfg.raw = root;
  if (root.contains("kind")) {
    if (!root.at("kind").is_string()) throw ConfigError("kind must be a string");
    cfg.kind = root.at("kind").get<std::string>();
    if (!cli_kind.empty() && cli_kind != cfg.kind) {
      throw ConfigError("config kind '" + cfg.kind + "' does not match command '" + cli_kind + "'");
    }
  } else {
    cfg.kind = cli_kind;
  }
  if (!experiment_kinds().count(cfg.kind)) throw ConfigError("unknown experiment kind '" + cfg.kind + "'");

  const json& model = section(root, "model");
  only_keys(model, "model", {"id", "params"});
  if (!model.contains("id") || !model.at("id").is_string()) throw ConfigError("model.id must be a string");
  cfg.model_id = model.at("id").get<std::string>();
  if (model.contains("params")) {
    if (!model.at("params").is_object()) throw ConfigError("model.params must be an object");
    for (const auto& [key, value] : model.at("params").items()) {
      if (!value.is_number()) throw ConfigError("model.params." + key + " must be a number");
      cfg.model_params[key] = value.get<double>();
    }
  }
  if (root.contains("theta")) {
    const double theta = number(root, "theta", "config");
    const auto it = cfg.model_params.find("theta");
    if (it != cfg.model_params.end() && it->second != theta) throw ConfigError("theta given twice with different values");
    cfg.model_params["theta"] = theta;
  }

  const json& grid = section(root, "grid");
  only_keys(grid, "grid", {"dt", "r", "T"});
  cfg.dt = number(grid, "dt", "grid");
  cfg.r = number_or(grid, "r", "grid", 0.0);
  cfg.T = number(grid, "T", "grid");
  const TimeGrid tg = cfg.grid();

  if (root.contains("seed")) {
    const auto& s = root.at("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (root.contains("output")) {
    if (!root.at("output").is_string()) throw ConfigError("output must be a string");
    cfg.output = root.at("output").get<std::string>();
  }
  if (root.contains("solver")) {
    only_keys(root.at("solver"), "solver", {"blowup_bound"});
    cfg.blowup_bound = number_or(root.at("solver"), "blowup_bound", "solver", cfg.blowup_bound);
  }

  const GalleryModel gm = cfg.model();
  const std::size_t dim = gm.spec.dim();
  if (root.contains("init")) cfg.init = parse_law(root.at("init"), "init", dim);
  if (root.contains("init_alt")) cfg.init_alt = parse_law(root.at("init_alt"), "init_alt", dim);
  auto need_init = [&](bool alt) {
    if (!cfg.init) throw ConfigError("kind '" + cfg.kind + "' requires an 'init' law");
    if (alt && !cfg.init_alt) throw ConfigError("kind '" + cfg.kind + "' requires an 'init_alt' law");
  };

  const std::string& k = cfg.kind;
  if (k == "check") {
    if (root.contains("check")) {
      const json& c = root.at("check");
      only_keys(c, "check", {"n_trials", "n_lag", "claim"});
      cfg.check.n_trials = count_or(c, "n_trials", "check", cfg.check.n_trials);
      cfg.check.n_lag = count_or(c, "n_lag", "check", tg.n_lag());
      if (c.contains("claim")) {
        const json& cl = c.at("claim");
        only_keys(cl, "check.claim", {"lambda1", "lambda2", "lambda3"});
        DissipativityParams p;
        p.lambda1 = number(cl, "lambda1", "check.claim");
        p.lambda2 = number_or(cl, "lambda2", "check.claim", 0.0);
        p.lambda3 = number_or(cl, "lambda3", "check.claim", 0.0);
        p.r = tg.r();
        cfg.check.claim = p;
      }
    } else {
      cfg.check.n_lag = tg.n_lag();
    }
  } else if (k == "simulate") {
    need_init(false);
    const json& s = section(root, "simulate");
    only_keys(s, "simulate", {"n_paths"});
    cfg.simulate_paths = count(s, "n_paths", "simulate");
    if (cfg.simulate_paths == 0) throw ConfigError("simulate.n_paths must be positive");
  } else if (k == "picard") {
    need_init(false);
    cfg.picard = parse_picard(section(root, "picard"), "picard", true);
    cfg.picard.validate();
  } else if (k == "particles") {
    need_init(false);
    const json& s = section(root, "particles");
    only_keys(s, "particles", {"N"});
    cfg.particles_N = count(s, "N", "particles");
    if (cfg.particles_N == 0) throw ConfigError("particles.N must be positive");
  } else if (k == "chaos") {
    need_init(false);
    const json& s = section(root, "chaos");
    only_keys(s, "chaos", {"Ns", "M_ref", "replicates", "reference"});
    if (!s.contains("Ns") || !s.at("Ns").is_array() || s.at("Ns").empty()) throw ConfigError("chaos.Ns must be a nonempty array");
    cfg.chaos.Ns.clear();
    for (const auto& n : s.at("Ns")) {
      if (!n.is_number_integer() || n.get<long long>() <= 0) throw ConfigError("chaos.Ns entries must be positive integers");
      cfg.chaos.Ns.push_back(n.get<std::size_t>());
    }
    cfg.chaos.M_ref = count_or(s, "M_ref", "chaos", cfg.chaos.M_ref);
    cfg.chaos.replicates = count_or(s, "replicates", "chaos", cfg.chaos.replicates);
    if (s.contains("reference")) cfg.chaos.reference = parse_picard(s.at("reference"), "chaos.reference", false);
    cfg.chaos.theta = gm.spec.theta;
    cfg.chaos.master_seed = cfg.seed;
    for (std::size_t i = 0; i < cfg.chaos.Ns.size(); ++i) {
      if (i > 0 && cfg.chaos.Ns[i] <= cfg.chaos.Ns[i - 1]) throw ConfigError("chaos.Ns must be strictly increasing");
    }
    if (cfg.chaos.M_ref <= cfg.chaos.Ns.back()) throw ConfigError("chaos.M_ref must exceed max(Ns)");
    if (cfg.chaos.replicates == 0) throw ConfigError("chaos.replicates must be positive");
  } else if (k == "ergodicity") {
    need_init(true);
    const json& s = section(root, "ergodicity");
    only_keys(s, "ergodicity", {"N", "shared_noise", "report_every", "fit_start"});
    cfg.ergodicity_N = count(s, "N", "ergodicity");
    if (cfg.ergodicity_N == 0) throw ConfigError("ergodicity.N must be positive");
    cfg.ergodicity_shared_noise = flag_or(s, "shared_noise", "ergodicity", true);
    cfg.ergodicity.report_every = count_or(s, "report_every", "ergodicity", cfg.ergodicity.report_every);
    cfg.ergodicity.fit_start = number_or(s, "fit_start", "ergodicity", cfg.ergodicity.fit_start);
    if (cfg.ergodicity.report_every == 0) throw ConfigError("ergodicity.report_every must be positive");
  } else if (k == "certify") {
    need_init(true);
    if (!gm.hamiltonian) throw ConfigError("certify requires a model with a Hamiltonian form");
    const json& s = section(root, "certify");
    only_keys(s, "certify", {"n_paths", "M", "K", "wtilde0", "k", "metric_stride"});
    cfg.certify.n_paths = count(s, "n_paths", "certify");
    cfg.certify.M = count_or(s, "M", "certify", cfg.certify.M);
    cfg.certify.K = number_or(s, "K", "certify", 0.0);
    if (s.contains("wtilde0")) cfg.certify.wtilde0 = number(s, "wtilde0", "certify");
    if (s.contains("k")) {
      cfg.certify.k_override = static_cast<unsigned>(count(s, "k", "certify"));
      cfg.certify.has_k_override = true;
    }
    cfg.certify.metric_stride = count_or(s, "metric_stride", "certify", 1);
    if (cfg.certify.n_paths < 2 || cfg.certify.M < 2) throw ConfigError("certify.n_paths and certify.M must be >= 2");
    if (cfg.certify.metric_stride == 0) throw ConfigError("certify.metric_stride must be positive");
    if (!(tg.T() > tg.r())) throw ConfigError("certify requires T > r");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path, const std::string& cli_kind = "") {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json root;
  try {
    root = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(root, cli_kind);
}

}  // namespace mfh::app
