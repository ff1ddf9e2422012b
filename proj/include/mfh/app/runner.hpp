#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mfh/app/config.hpp"
#include "mfh/app/csv.hpp"
#include "mfh/app/svg.hpp"
#include "mfh/mfh.hpp"

#ifndef MFH_VERSION
#define MFH_VERSION "0.0.0"
#endif

namespace mfh::app {

enum ExitCode : int { kOk = 0, kConfigError = 2, kBlowUp = 3, kNotConverged = 4 };

struct RunRequest {
  std::string kind;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

/// Outcome of one experiment: files to write plus manifest results.
struct RunOutput {
  std::vector<std::pair<std::string, CsvTable>> tables;
  json results = json::object();
  json seeds = json::object();
  int exit_code = kOk;
};

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline std::vector<std::string> state_header(const std::string& prefix, std::size_t m, std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(prefix + "x" + std::to_string(i));
  for (std::size_t i = 0; i < d; ++i) out.push_back(prefix + "y" + std::to_string(i));
  return out;
}

/// Mean state and mean squared norm of the time-0 values of a measure.
inline CsvTable flow_mean_table(const FrozenFlow& flow, std::size_t m, std::size_t d) {
  CsvTable table;
  table.header = {"t"};
  for (auto& h : state_header("mean_", m, d)) table.header.push_back(h);
  table.header.push_back("second_moment");
  for (std::size_t k = 0; k <= flow.grid().n_steps(); ++k) {
    const auto& mu = flow.at(k);
    Vec mean = mean_current(mu);
    double second = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) second += mu.atom_current(i).squaredNorm();
    second /= static_cast<double>(mu.size());
    std::vector<double> row = {flow.grid().time(k)};
    for (Eigen::Index i = 0; i < mean.size(); ++i) row.push_back(mean(i));
    row.push_back(second);
    table.add_numeric_row(row);
  }
  return table;
}

inline RunOutput run_check(const ExperimentConfig& cfg, std::ostream& log) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  CsvTable table;
  table.header = {"assumption", "status", "value", "detail"};
  auto row = [&](const std::string& name, const std::string& status, double value, const std::string& detail) {
    table.add_row({name, status, format_number(value), sanitize_cell(detail)});
    log << name << ": " << status << " (" << format_number(value) << ") " << detail << "\n";
    out.results[name] = {{"status", status}, {"value", number_or_null(value)}, {"detail", detail}};
  };

  Mat sigma;
  if (gm.hamiltonian) {
    sigma = gm.hamiltonian->sigma;
  } else {
    const std::size_t dim = gm.spec.dim();
    Vec x = Vec::Zero(static_cast<Eigen::Index>(dim));
    Vec law;
    if (gm.spec.functionals) {
      law = gm.spec.functionals(EmpiricalMeasure({Segment::constant(x, gm.spec.m, grid.n_lag())}, gm.spec.theta));
    }
    sigma = gm.spec.diffusion_sigma(0.0, x, law);
  }
  const double cond = condition_number(sigma);
  row("sigma_invertible", std::isfinite(cond) ? "pass" : "fail", cond,
      gm.spec.sigma_depends_on_measure ? "condition number at the origin with a point mass" : "condition number");

  if (gm.hamiltonian) {
    const auto rank = check_rank_condition(gm.hamiltonian->A, gm.hamiltonian->M);
    row("rank_condition", rank.satisfied ? "pass" : "fail", static_cast<double>(rank.k),
        "k with rank " + std::to_string(rank.rank) + " of " + std::to_string(gm.hamiltonian->m()));
  } else {
    row("rank_condition", "unknown", 0.0, "model has no Hamiltonian form");
  }

  std::optional<DissipativityParams> claim = cfg.check.claim;
  std::string source = "config claim";
  if (!claim && gm.id == "linear_kinetic_delay") {
    claim = linear_kinetic_dissipativity(cfg.model_params, grid.r());
    source = "closed-form constants";
    if (!claim) row("condition_C", "unknown", 0.0, "closed-form bound gives lambda1 <= 0");
  }
  if (claim) {
    claim->r = grid.r();
    const bool ok = check_condition_C(*claim);
    const double slack = sup_delta_exp(claim->lambda1, claim->r) - claim->lambda2 - claim->lambda3;
    row("condition_C", ok ? "pass" : "fail", slack,
        source + " lambda1=" + format_number(claim->lambda1) + " lambda2=" + format_number(claim->lambda2) +
            " lambda3=" + format_number(claim->lambda3));
    if (gm.hamiltonian) {
      const std::uint64_t seed = derive_seed(cfg.seed, "check-falsifier");
      out.seeds["falsifier"] = seed;
      const auto cx = falsify_condition_C_by_sampling(*gm.hamiltonian, *claim, cfg.check.n_trials, seed, cfg.check.n_lag);
      if (cx) {
        row("condition_C_sampling", "fail", cx->lhs - cx->rhs,
            "counterexample at trial " + std::to_string(cx->trial) + " lhs=" + format_number(cx->lhs) +
                " rhs=" + format_number(cx->rhs));
        out.results["counterexample"] = {{"trial", cx->trial},
                                         {"xi_current", vec_json(cx->xi.current())},
                                         {"xi_bar_current", vec_json(cx->xi_bar.current())},
                                         {"lhs", cx->lhs},
                                         {"rhs", cx->rhs}};
      } else {
        row("condition_C_sampling", "pass", static_cast<double>(cfg.check.n_trials), "no violation found in trials");
      }
    }
  } else if (!gm.hamiltonian || gm.id != "linear_kinetic_delay") {
    row("condition_C", "unknown", 0.0, "no dissipativity constants available");
  }
  out.tables.emplace_back("check.csv", std::move(table));
  return out;
}

inline RunOutput run_simulate(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  const std::uint64_t init_seed = derive_seed(cfg.seed, "init"), noise_seed = derive_seed(cfg.seed, "noise");
  out.seeds["init"] = init_seed;
  out.seeds["noise"] = noise_seed;
  const auto inits = cfg.init->sample(cfg.simulate_paths, gm.spec.m, grid, init_seed);
  const FrozenFlow flow = FrozenFlow::constant(grid, EmpiricalMeasure(inits, gm.spec.theta));
  const auto paths = simulate_ensemble(gm.spec, inits, flow, make_streams(noise_seed, inits.size()), options);
  CsvTable table;
  table.header = {"path", "t"};
  for (auto& h : state_header("", gm.spec.m, gm.spec.d)) table.header.push_back(h);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
      std::vector<double> row = {static_cast<double>(p), grid.time(k)};
      const Vec x = paths[p].state(k);
      for (Eigen::Index i = 0; i < x.size(); ++i) row.push_back(x(i));
      table.add_numeric_row(row);
    }
  }
  out.results["frozen_law"] = "initial sample held constant";
  out.tables.emplace_back("paths.csv", std::move(table));
  return out;
}

inline RunOutput run_picard(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  const std::uint64_t init_seed = derive_seed(cfg.seed, "init"), picard_seed = derive_seed(cfg.seed, "picard");
  out.seeds["init"] = init_seed;
  out.seeds["picard"] = picard_seed;
  const auto inits = cfg.init->sample(cfg.picard.M, gm.spec.m, grid, init_seed);
  const PicardResult res = picard_solve(gm.spec, EmpiricalMeasure(inits, gm.spec.theta), grid, cfg.picard, picard_seed, options);
  CsvTable trace;
  trace.header = {"iteration", "metric"};
  for (std::size_t k = 0; k < res.trace.size(); ++k) trace.add_numeric_row({static_cast<double>(k + 1), res.trace[k]});
  out.results["iterations"] = res.iterations();
  out.results["converged"] = res.converged;
  out.results["delta0"] = res.delta0;
  out.results["exact_metric"] = res.exact_metric;
  out.tables.emplace_back("picard.csv", std::move(trace));
  out.tables.emplace_back("picard_mean.csv", flow_mean_table(res.flow, gm.spec.m, gm.spec.d));
  if (!res.converged) out.exit_code = kNotConverged;
  return out;
}

inline RunOutput run_particles(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  const std::uint64_t init_seed = derive_seed(cfg.seed, "init"), noise_seed = derive_seed(cfg.seed, "noise");
  out.seeds["init"] = init_seed;
  out.seeds["noise"] = noise_seed;
  const auto inits = cfg.init->sample(cfg.particles_N, gm.spec.m, grid, init_seed);
  auto paths = particle_solve(gm.spec, inits, grid, make_streams(noise_seed, inits.size()), options);
  const FrozenFlow flow = FrozenFlow::from_paths(grid, std::move(paths), gm.spec.theta);
  out.tables.emplace_back("particles_mean.csv", flow_mean_table(flow, gm.spec.m, gm.spec.d));
  return out;
}

inline RunOutput run_chaos(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  out.seeds["master"] = cfg.seed;
  const ChaosReport rep = chaos_experiment(gm.spec, *cfg.init, grid, cfg.chaos, options);
  CsvTable table;
  table.header = {"N", "error", "stderr", "w_gap"};
  CsvTable ui;
  ui.header = {"N"};
  for (std::size_t j = 0; j < rep.ui_thresholds.size(); ++j) ui.header.push_back("tail_" + std::to_string(j));
  for (const auto& rec : rep.records) {
    table.add_numeric_row({static_cast<double>(rec.N), rec.error, rec.std_error, rec.wasserstein_gap});
    std::vector<double> row = {static_cast<double>(rec.N)};
    row.insert(row.end(), rec.ui_tail.begin(), rec.ui_tail.end());
    ui.add_numeric_row(row);
  }
  out.results["slope"] = number_or_null(rep.slope);
  out.results["reference_bias"] = rep.reference_bias;
  out.results["ui_thresholds"] = rep.ui_thresholds;
  out.results["reference_iterations"] = rep.reference_iterations;
  out.results["reference_converged"] = rep.reference_converged;
  out.tables.emplace_back("chaos.csv", std::move(table));
  out.tables.emplace_back("chaos_ui.csv", std::move(ui));
  if (!rep.reference_converged) out.exit_code = kNotConverged;
  return out;
}

inline RunOutput run_ergodicity(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const TimeGrid grid = cfg.grid();
  const std::size_t N = cfg.ergodicity_N;
  const std::uint64_t mu_seed = derive_seed(cfg.seed, "init"), nu_seed = derive_seed(cfg.seed, "init-alt");
  const std::uint64_t run_seed = derive_seed(cfg.seed, "ergodicity");
  out.seeds["init"] = mu_seed;
  out.seeds["init_alt"] = nu_seed;
  out.seeds["ergodicity"] = run_seed;
  const EmpiricalMeasure mu0(cfg.init->sample(N, gm.spec.m, grid, mu_seed), gm.spec.theta);
  const EmpiricalMeasure nu0(cfg.init_alt->sample(N, gm.spec.m, grid, nu_seed), gm.spec.theta);
  const ErgodicityReport rep =
      contraction_rate(gm.spec, mu0, nu0, grid, N, cfg.ergodicity_shared_noise, run_seed, cfg.ergodicity, options);
  CsvTable table;
  table.header = {"t", "w2", "coupling"};
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    table.add_numeric_row({rep.times[i], rep.w2_curve[i], rep.coupling_curve[i]});
  }
  out.results["kappa_hat"] = number_or_null(rep.kappa_hat);
  out.results["c_hat"] = rep.c_hat;
  out.results["fit_r2"] = rep.fit_r2;
  out.results["degenerate"] = rep.degenerate;
  out.tables.emplace_back("ergodicity.csv", std::move(table));
  return out;
}

inline RunOutput run_certify(const ExperimentConfig& cfg, const SolverOptions& options) {
  RunOutput out;
  const GalleryModel gm = cfg.model();
  const HamiltonianForm& ham = *gm.hamiltonian;
  const TimeGrid grid = cfg.grid();
  const double theta = gm.spec.theta;
  const std::uint64_t mu_seed = derive_seed(cfg.seed, "init"), nu_seed = derive_seed(cfg.seed, "init-alt");
  const std::uint64_t pmu_seed = derive_seed(cfg.seed, "picard"), pnu_seed = derive_seed(cfg.seed, "picard-alt");
  const std::uint64_t g_seed = derive_seed(cfg.seed, "girsanov");
  out.seeds["init"] = mu_seed;
  out.seeds["init_alt"] = nu_seed;
  out.seeds["picard"] = pmu_seed;
  out.seeds["picard_alt"] = pnu_seed;
  out.seeds["girsanov"] = g_seed;

  PicardConfig pc;
  pc.M = cfg.certify.M;
  pc.metric_stride = cfg.certify.metric_stride;
  const EmpiricalMeasure mu0(cfg.init->sample(pc.M, gm.spec.m, grid, mu_seed), theta);
  const EmpiricalMeasure nu0(cfg.init_alt->sample(pc.M, gm.spec.m, grid, nu_seed), theta);
  const PicardResult fmu = picard_solve(gm.spec, mu0, grid, pc, pmu_seed, options);
  const PicardResult fnu = picard_solve(gm.spec, nu0, grid, pc, pnu_seed, options);
  const GirsanovCertificate g = girsanov_certificate(ham, fmu.flow, fnu.flow, cfg.certify.n_paths, g_seed, options);
  const double sigma_inv_norm = operator_norm(ham.sigma.inverse());
  const double flow_dist = max_flow_distance(fmu.flow, fnu.flow, theta, cfg.certify.metric_stride);
  const double gamma_bound = sigma_inv_norm * (ham.K_Z + ham.K_B) * flow_dist;

  EntropyInputs in;
  in.sigma_inv_norm = sigma_inv_norm;
  in.K_Z = ham.K_Z;
  in.K_B = ham.K_B;
  in.K = cfg.certify.K;
  in.T = grid.T();
  in.r = grid.r();
  in.M_norm = operator_norm(ham.M);
  const auto rank = check_rank_condition(ham.A, ham.M);
  in.k = cfg.certify.has_k_override ? cfg.certify.k_override : static_cast<unsigned>(rank.k);
  in.w2_0 = wasserstein_exact(mu0, nu0, 2.0);
  in.wtilde0 = cfg.certify.wtilde0 ? *cfg.certify.wtilde0 : wasserstein_exact(mu0, nu0, theta);
  const EntropyCertificate ent = entropy_bound(in);

  CsvTable table;
  table.header = {"quantity", "value", "stderr"};
  auto add = [&](const std::string& name, double v, double se) {
    table.add_row({name, format_number(v), format_number(se)});
  };
  add("E_R", g.E_R, g.se_R);
  add("E_RlogR", g.E_RlogR, g.se_RlogR);
  add("half_int_gamma_sq_Q", g.half_int_gamma_sq_under_Q, g.se_half_int_gamma_sq);
  add("gamma_sup", g.gamma_sup, 0.0);
  add("gamma_bound", gamma_bound, 0.0);
  add("flow_distance", flow_dist, 0.0);
  add("effective_sample_size", g.effective_sample_size, 0.0);
  add("entropy_first_term", ent.first_term, 0.0);
  add("entropy_sigma_term_over_C", ent.sigma_term_over_C, 0.0);
  add("w2_0", in.w2_0, 0.0);
  add("wtilde0", in.wtilde0, 0.0);

  out.results["degenerate"] = g.degenerate;
  out.results["gamma_bound_respected"] = g.gamma_sup <= gamma_bound * (1.0 + 1e-9) + 1e-12;
  out.results["entropy_inputs"] = {{"sigma_inv_norm", in.sigma_inv_norm}, {"K_Z", in.K_Z}, {"K_B", in.K_B},
                                   {"K", in.K}, {"T", in.T}, {"r", in.r}, {"M_norm", in.M_norm}, {"k", in.k}};
  out.results["flows_converged"] = fmu.converged && fnu.converged;
  out.tables.emplace_back("certificate.csv", std::move(table));
  if (!fmu.converged || !fnu.converged) out.exit_code = kNotConverged;
  return out;
}

inline RunOutput dispatch(const ExperimentConfig& cfg, std::ostream& log) {
  SolverOptions options;
  options.blowup_bound = cfg.blowup_bound;
  const std::string& k = cfg.kind;
  if (k == "check") return run_check(cfg, log);
  if (k == "simulate") return run_simulate(cfg, options);
  if (k == "picard") return run_picard(cfg, options);
  if (k == "particles") return run_particles(cfg, options);
  if (k == "chaos") return run_chaos(cfg, options);
  if (k == "ergodicity") return run_ergodicity(cfg, options);
  return run_certify(cfg, options);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

}  // namespace detail

/// Runs one experiment and writes manifest.json plus its CSV files. Returns the exit code.
inline int run(const RunRequest& req, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  ExperimentConfig cfg;
  try {
    std::ifstream f(req.config_path);
    if (!f) throw ConfigError("cannot open config file " + req.config_path);
    json root;
    try {
      root = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    if (req.seed) root["seed"] = *req.seed;
    if (req.out_dir) root["output"] = *req.out_dir;
    if (!root.contains("seed")) root["seed"] = std::uint64_t{0};
    cfg = parse_config(root, req.kind);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  RunOutput out;
  try {
    out = detail::dispatch(cfg, log);
  } catch (const BlowUpError& e) {
    err << "numeric blow-up: " << e.what() << "\n";
    return kBlowUp;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kBlowUp;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const std::filesystem::path dir(cfg.output);
    std::filesystem::create_directories(dir);
    for (const auto& [name, table] : out.tables) table.write((dir / name).string());
    json manifest = {{"tool", "mfh"},
                     {"version", MFH_VERSION},
                     {"kind", cfg.kind},
                     {"config", cfg.raw},
                     {"seeds", out.seeds},
                     {"results", out.results}};
    manifest["seeds"]["master"] = cfg.seed;
    json files = json::array();
    for (const auto& [name, table] : out.tables) files.push_back(name);
    manifest["files"] = files;
    detail::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    log << "wrote " << out.tables.size() << " table(s) and manifest.json to " << dir.string() << "\n";
  } catch (const std::exception& e) {
    err << "output error: " << e.what() << "\n";
    return kConfigError;
  }
  if (out.exit_code == kNotConverged) err << "warning: fixed-point iteration did not converge\n";
  return out.exit_code;
}

namespace detail {

inline SvgSeries fitted_line(const std::vector<double>& at, double slope, double intercept, bool log_x) {
  SvgSeries s;
  s.color = "#d62728";
  s.markers = false;
  s.dashed = true;
  s.label = "fit slope " + fmt(slope, "%.3g");
  for (double x : at) {
    s.x.push_back(x);
    const double u = log_x ? std::log(x) : x;
    s.y.push_back(std::exp(intercept + slope * u));
  }
  return s;
}

inline std::string chaos_svg(const CsvTable& t) {
  const auto N = t.numeric_column("N");
  const auto err = t.numeric_column("error");
  t.numeric_column("stderr");
  const auto gap = t.numeric_column("w_gap");
  SvgPlot plot;
  plot.title = "Propagation of chaos";
  plot.x_label = "N";
  plot.y_label = "E sup |X - X^N|^theta";
  plot.log_x = plot.log_y = true;
  plot.series.push_back({N, err, "error", "#1f77b4", true, false});
  plot.series.push_back({N, gap, "endpoint W gap", "#2ca02c", true, false});
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < N.size(); ++i) {
    if (N[i] > 0 && err[i] > 0) {
      lx.push_back(std::log(N[i]));
      ly.push_back(std::log(err[i]));
    }
  }
  if (lx.size() >= 2) {
    const LinearFit fit = least_squares(lx, ly);
    plot.series.push_back(fitted_line({N.front(), N.back()}, fit.slope, fit.intercept, true));
  } else {
    plot.annotations.push_back("fewer than two positive errors: no fit");
  }
  return render_svg(plot);
}

inline std::string ergodicity_svg(const CsvTable& t) {
  const auto time = t.numeric_column("t");
  const auto w2 = t.numeric_column("w2");
  const auto coupling = t.numeric_column("coupling");
  SvgPlot plot;
  plot.title = "Contraction of W2";
  plot.x_label = "t";
  plot.y_label = "W2";
  plot.log_y = true;
  plot.series.push_back({time, w2, "W2 (exact OT)", "#1f77b4", true, false});
  plot.series.push_back({time, coupling, "synchronous coupling", "#ff7f0e", false, true});
  std::vector<double> xs, ys;
  const double t_end = time.empty() ? 0.0 : time.back();
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (time[i] >= 0.5 * t_end && w2[i] > 0.0) {
      xs.push_back(time[i]);
      ys.push_back(std::log(w2[i]));
    }
  }
  if (xs.size() >= 2) {
    const LinearFit fit = least_squares(xs, ys);
    plot.series.push_back(fitted_line({xs.front(), xs.back()}, fit.slope, fit.intercept, false));
  } else {
    plot.annotations.push_back("degenerate: fewer than two positive W2 values in the fit window");
  }
  return render_svg(plot);
}

inline std::string picard_svg(const CsvTable& t) {
  const auto it = t.numeric_column("iteration");
  const auto metric = t.numeric_column("metric");
  SvgPlot plot;
  plot.title = "Picard iteration metric";
  plot.x_label = "iteration";
  plot.y_label = "weighted flow distance";
  plot.log_y = true;
  plot.series.push_back({it, metric, "metric", "#1f77b4", true, false});
  bool any_positive = false;
  for (double v : metric) any_positive = any_positive || v > 0.0;
  if (!any_positive) plot.annotations.push_back("all metric values are zero");
  return render_svg(plot);
}

}  // namespace detail

/// Renders SVG plots for every recognized CSV in `dir`. Exit 2 when none is present or a column is missing.
inline int report(const std::string& dir, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    err << "report: " << dir << " is not a directory\n";
    return kConfigError;
  }
  struct Job {
    const char* csv;
    const char* svg;
    std::string (*render)(const CsvTable&);
  };
  const Job jobs[] = {{"chaos.csv", "chaos.svg", detail::chaos_svg},
                      {"ergodicity.csv", "ergodicity.svg", detail::ergodicity_svg},
                      {"picard.csv", "picard.svg", detail::picard_svg}};
  std::size_t written = 0;
  for (const auto& job : jobs) {
    const fs::path csv = fs::path(dir) / job.csv;
    if (!fs::exists(csv)) continue;
    try {
      const CsvTable table = read_csv(csv.string());
      detail::write_text(fs::path(dir) / job.svg, job.render(table));
      log << "wrote " << (fs::path(dir) / job.svg).string() << "\n";
      ++written;
    } catch (const std::exception& e) {
      err << "report: " << job.csv << ": " << e.what() << "\n";
      return kConfigError;
    }
  }
  if (written == 0) {
    err << "report: no chaos.csv, ergodicity.csv or picard.csv in " << dir << "\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace mfh::app
