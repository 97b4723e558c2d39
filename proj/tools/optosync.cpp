// optosync: command-line driver for single runs, parameter sweeps and
// stability checks of the modulated coupled optomechanical system.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "optosync/io.hpp"
#include "optosync/version.hpp"

namespace fs = std::filesystem;
using namespace optosync;

namespace {

std::string wall_time_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&t, &utc);
  std::ostringstream os;
  os << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

RunConfig resolve_config(const CommonOptions& opts) {
  RunConfig config = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
  for (const auto& o : opts.overrides) apply_override(config, o);
  validate_config(config);
  return config;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
}

std::string join_command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

void write_manifest(const std::string& out_dir, const RunConfig& config,
                    const std::string& command_line, const std::string& started,
                    const std::vector<std::string>& files, nlohmann::json extra = {}) {
  nlohmann::json manifest;
  manifest["tool"] = "optosync";
  manifest["version"] = kVersion;
  manifest["command_line"] = command_line;
  manifest["config"] = config_json(config);
  manifest["start_time"] = started;
  manifest["end_time"] = wall_time_now();
  manifest["outputs"] = files;
  if (!extra.is_null()) manifest["sweep"] = std::move(extra);
  write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
}

template <class Writer>
void write_with(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  writer(out);
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

int cmd_simulate(const CommonOptions& opts, const std::string& out_dir,
                 const std::string& command_line) {
  const std::string started = wall_time_now();
  const RunConfig config = resolve_config(opts);
  ensure_dir(out_dir);
  const RunResult result = run(config);

  const fs::path dir(out_dir);
  write_with((dir / "trajectory.csv").string(),
             [&](std::ostream& os) { write_trajectory_csv(os, result.trajectory); });
  write_with((dir / "measures.csv").string(),
             [&](std::ostream& os) { write_measures_csv(os, result.measures); });
  write_file((dir / "steady.json").string(), steady_json(result.summary).dump(2) + "\n");
  write_manifest(out_dir, config, command_line, started,
                 {"trajectory.csv", "measures.csv", "steady.json", "manifest.json"});
  return 0;
}

struct SweepOptions {
  std::string recipe;
  std::string param;
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  unsigned jobs = 0;
};

int cmd_sweep(const CommonOptions& opts, const SweepOptions& sweep, const std::string& out_dir,
              const std::string& command_line) {
  const std::string started = wall_time_now();
  const RunConfig config = resolve_config(opts);

  SweepSpec spec;
  if (!sweep.recipe.empty()) {
    const FigureRecipe recipe = figure_recipe(sweep.recipe, config.numerics, config.params);
    if (!recipe.sweep) {
      throw InvalidParams("recipe '" + sweep.recipe + "' is a single run; use simulate");
    }
    spec = *recipe.sweep;
  } else {
    if (sweep.param.empty() || sweep.steps < 1) {
      throw InvalidParams("sweep needs --recipe or --param/--from/--to/--steps");
    }
    spec.base = config.params;
    spec.param = parse_sweep_param(sweep.param);
    spec.values = linspace(sweep.from, sweep.to, sweep.steps);
    spec.numerics = config.numerics;
  }
  ensure_dir(out_dir);
  const std::vector<SweepRow> rows = run_sweep(spec, sweep.jobs);
  write_with((fs::path(out_dir) / "sweep.csv").string(),
             [&](std::ostream& os) { write_sweep_csv(os, spec.param, rows); });

  RunConfig base_config{spec.base, spec.numerics};
  nlohmann::json extra = {{"param_name", std::string(to_string(spec.param))},
                          {"values", spec.values}};
  if (!sweep.recipe.empty()) extra["recipe"] = sweep.recipe;
  write_manifest(out_dir, base_config, command_line, started, {"sweep.csv", "manifest.json"},
                 std::move(extra));
  return 0;
}

int cmd_stability(const CommonOptions& opts, int samples) {
  RunConfig config = resolve_config(opts);
  config.numerics.stability_samples = samples;
  const Trajectory traj = simulate(config.params, CovMatrix::vacuum(), config.numerics.t_end,
                                   config.numerics.resolved_dt(config.params),
                                   config.numerics.record_stride);
  const StabilityReport report = stability_scan(config.params, traj, samples);
  std::cout << stability_json(report).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and covariance simulator for two coupled, modulated optomechanical "
               "cavities"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_dir = "out";
  SweepOptions sweep_opts;
  int stability_samples = 16;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "key = value config file or manifest.json");
    sub->add_option("--set", common.overrides, "override a config key (KEY=VALUE), repeatable");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "integrate one run and write its tables");
  add_common(simulate_cmd);
  simulate_cmd->add_option("--out", out_dir, "output directory");

  auto* sweep_cmd = app.add_subcommand("sweep", "scan one parameter");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--out", out_dir, "output directory");
  sweep_cmd->add_option("--recipe", sweep_opts.recipe, "figure recipe (fig4a, fig4b, fig6)");
  sweep_cmd->add_option("--param", sweep_opts.param, "lambda, A_c or omega_c");
  sweep_cmd->add_option("--from", sweep_opts.from, "first value");
  sweep_cmd->add_option("--to", sweep_opts.to, "last value");
  sweep_cmd->add_option("--steps", sweep_opts.steps, "number of values")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--jobs", sweep_opts.jobs, "worker threads (0 = all cores)");

  auto* stability_cmd =
      app.add_subcommand("stability", "max real eigenvalue of the drift matrix over the last period");
  add_common(stability_cmd);
  stability_cmd->add_option("--samples", stability_samples, "samples in the final period")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  const std::string command_line = join_command_line(argc, argv);
  try {
    if (*simulate_cmd) return cmd_simulate(common, out_dir, command_line);
    if (*sweep_cmd) return cmd_sweep(common, sweep_opts, out_dir, command_line);
    if (*stability_cmd) return cmd_stability(common, stability_samples);
  } catch (const NonFinite& e) {
    std::cerr << "error [NonFinite]: integration diverged at t = " << format_number(e.time())
              << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
