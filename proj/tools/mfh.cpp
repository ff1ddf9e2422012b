#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "mfh/app/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mean-field path-dependent SDE experiments"};
  app.set_version_flag("--version", std::string(MFH_VERSION));
  app.require_subcommand(1);

  std::string config_path, out_dir, in_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  for (const auto& kind : mfh::app::experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run a " + kind + " experiment");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_option("--threads", threads, "worker threads (default MFH_THREADS or hardware)");
  }
  auto* report = app.add_subcommand("report", "render SVG plots from a results directory");
  report->add_option("--in", in_dir, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mfh::app::kConfigError;
  }

  if (report->parsed()) return mfh::app::report(in_dir);

  auto* sub = app.get_subcommands().front();
  if (threads > 0) mfh::set_thread_count(threads);
  mfh::app::RunRequest req;
  req.kind = sub->get_name();
  req.config_path = config_path;
  if (sub->count("--out")) req.out_dir = out_dir;
  if (sub->count("--seed")) req.seed = seed;
  return mfh::app::run(req);
}
