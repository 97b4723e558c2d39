#pragma once

// Single-run analysis (simulate -> steady state -> windowed averages) and
// one-parameter sweeps built on top of it, plus the parameter recipes of the
// reference figures.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "optosync/measures.hpp"

namespace optosync {

struct NumericalControls {
  /// Integration step; unset means 2pi / (500 * fastest frequency).
  std::optional<double> dt;
  double t_end = 3000.0;
  double transient_fraction = 0.6;
  int record_stride = 25;
  double steady_tol = 1e-3;
  int stability_samples = 16;

  double resolved_dt(const SystemParams& params) const {
    if (dt) return *dt;
    const double fastest = std::max({params.omega_c, params.omega1, params.omega2,
                                     std::abs(params.delta1), std::abs(params.delta2)});
    return kTwoPi / (500.0 * fastest);
  }

  void validate() const {
    if (dt && (!(*dt > 0) || !std::isfinite(*dt))) throw InvalidParams("dt must be > 0");
    if (!(t_end > 0) || !std::isfinite(t_end)) throw InvalidParams("t_end must be > 0");
    if (!(transient_fraction >= 0 && transient_fraction < 1)) {
      throw InvalidParams("transient_fraction must lie in [0, 1)");
    }
    if (record_stride < 1) throw InvalidParams("record_stride must be >= 1");
    if (!(steady_tol > 0)) throw InvalidParams("steady_tol must be > 0");
  }
};

struct RunConfig {
  SystemParams params;
  NumericalControls numerics;
};

/// Steady-window summary of one simulation.
struct RunSummary {
  SteadyStateInfo steady;
  TimeWindow window;
  double phi = 0.0;
  double avg_s_q = 0.0;
  double avg_s_phi = 0.0;
  double avg_s_p = 0.0;
  double avg_s_anti = 0.0;
  double avg_s_c = 0.0;
  StabilityReport stability;
};

struct RunResult {
  Trajectory trajectory;
  MeasureSeries measures;
  RunSummary summary;
};

/// Post-processes a finished trajectory. The averaging window spans a whole
/// number of detected limit-cycle periods after the transient.
inline RunResult analyze(Trajectory traj, const NumericalControls& numerics) {
  const SystemParams& params = traj.params;
  RunSummary summary;
  summary.steady = detect_steady_state(traj, params, numerics.steady_tol);
  summary.window = steady_window(traj, numerics.transient_fraction, summary.steady.period_used);
  summary.phi = phase_series(traj, summary.window).summary_phi;

  MeasureSeries series = compute_measures(traj, summary.phi);
  summary.avg_s_q = time_average(series.times, series.s_q, summary.window);
  summary.avg_s_phi = time_average(series.times, series.s_phi, summary.window);
  summary.avg_s_p = time_average(series.times, series.s_p, summary.window);
  summary.avg_s_anti = time_average(series.times, series.s_anti, summary.window);
  summary.avg_s_c = time_average(series.times, series.s_c, summary.window);
  summary.stability = stability_scan(params, traj, numerics.stability_samples);
  return RunResult{std::move(traj), std::move(series), std::move(summary)};
}

inline RunResult run(const RunConfig& config) {
  config.numerics.validate();
  Trajectory traj = simulate(config.params, CovMatrix::vacuum(), config.numerics.t_end,
                             config.numerics.resolved_dt(config.params),
                             config.numerics.record_stride);
  return analyze(std::move(traj), config.numerics);
}

enum class SweepParam { Lambda, AmplitudeAc, OmegaC };

inline std::string_view to_string(SweepParam p) {
  switch (p) {
    case SweepParam::Lambda: return "lambda";
    case SweepParam::AmplitudeAc: return "A_c";
    case SweepParam::OmegaC: return "omega_c";
  }
  return "?";
}

inline SweepParam parse_sweep_param(std::string_view name) {
  if (name == "lambda") return SweepParam::Lambda;
  if (name == "A_c") return SweepParam::AmplitudeAc;
  if (name == "omega_c") return SweepParam::OmegaC;
  throw InvalidParams("sweep parameter must be one of lambda, A_c, omega_c; got '" +
                      std::string(name) + "'");
}

inline SystemParams with_value(SystemParams params, SweepParam which, double value) {
  switch (which) {
    case SweepParam::Lambda: params.lambda = value; break;
    case SweepParam::AmplitudeAc: params.A_c = value; break;
    case SweepParam::OmegaC: params.omega_c = value; break;
  }
  return params;
}

/// `count` evenly spaced values from `from` to `to` inclusive.
inline std::vector<double> linspace(double from, double to, int count) {
  if (count < 1) throw InvalidParams("linspace: count must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(from);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 ? to : from + (to - from) * i / (count - 1));
  }
  return out;
}

struct SweepSpec {
  SystemParams base;
  SweepParam param = SweepParam::Lambda;
  std::vector<double> values;
  NumericalControls numerics;

  void validate() const {
    if (values.empty()) throw InvalidParams("sweep values must be non-empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw InvalidParams("sweep values must be finite");
      if (i > 0 && !(values[i] > values[i - 1])) {
        throw InvalidParams("sweep values must be strictly increasing");
      }
    }
    numerics.validate();
  }
};

struct SweepRow {
  double param_value = 0.0;
  double avg_s_q = std::numeric_limits<double>::quiet_NaN();
  double avg_s_phi = std::numeric_limits<double>::quiet_NaN();
  double avg_s_p = std::numeric_limits<double>::quiet_NaN();
  double avg_s_anti = std::numeric_limits<double>::quiet_NaN();
  double avg_s_c = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  bool steady_reached = false;
  double max_real_eig = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

inline SweepRow summary_row(double value, const RunSummary& s) {
  SweepRow row;
  row.param_value = value;
  row.avg_s_q = s.avg_s_q;
  row.avg_s_phi = s.avg_s_phi;
  row.avg_s_p = s.avg_s_p;
  row.avg_s_anti = s.avg_s_anti;
  row.avg_s_c = s.avg_s_c;
  row.phi = s.phi;
  row.steady_reached = s.steady.reached;
  row.max_real_eig = s.stability.worst();
  return row;
}

/// One sweep point. Failures are captured in `status`, never thrown.
inline SweepRow run_point(const SweepSpec& spec, double value) {
  try {
    RunConfig config{with_value(spec.base, spec.param, value), spec.numerics};
    config.params.validate();
    const double needed = 50.0 * config.params.modulation_period();
    if (config.numerics.t_end < needed) {
      throw TooShort("t_end must cover at least 50 modulation periods (" +
                     std::to_string(needed) + ")");
    }
    return summary_row(value, run(config).summary);
  } catch (const Error& e) {
    SweepRow row;
    row.param_value = value;
    row.status = e.kind();
    return row;
  }
}

/// Runs every point on up to `jobs` worker threads (0 = hardware
/// concurrency). Rows come back in value order regardless of scheduling.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned jobs = 0) {
  spec.validate();
  std::vector<SweepRow> rows(spec.values.size());
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(rows.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      rows[i] = run_point(spec, spec.values[i]);
    }
  };
  if (jobs <= 1) {
    worker();
    return rows;
  }
  std::vector<std::jthread> pool;
  pool.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  pool.clear();
  return rows;
}

/// Parameters of one reference figure: either a single run or a sweep.
struct FigureRecipe {
  std::string name;
  SystemParams params;
  std::optional<SweepSpec> sweep;
};

/// `base` supplies every parameter the figure does not pin (bath occupation,
/// frequencies, ...); the recipe sets lambda, A_c and omega_c.
inline FigureRecipe figure_recipe(std::string_view name,
                                  const NumericalControls& numerics = NumericalControls{},
                                  const SystemParams& base = default_params()) {
  auto regime = [&](double lambda, double a_c, double omega_c) {
    SystemParams p = base;
    p.lambda = lambda;
    p.A_c = a_c;
    p.omega_c = omega_c;
    return p;
  };
  auto sweep = [&](SystemParams base, SweepParam param, double from, double to, int count) {
    return SweepSpec{base, param, linspace(from, to, count), numerics};
  };

  FigureRecipe r{std::string(name), default_params(), std::nullopt};
  if (name == "fig2") {
    r.params = regime(0.03, 2.0, 3.0);
  } else if (name == "fig3") {
    r.params = regime(0.14, 1.0, 2.0);
  } else if (name == "fig4a") {
    r.params = regime(0.03, 2.0, 3.0);
    r.sweep = sweep(r.params, SweepParam::Lambda, 0.005, 0.15, 30);
  } else if (name == "fig4b") {
    r.params = regime(0.03, 2.0, 3.0);
    r.sweep = sweep(r.params, SweepParam::AmplitudeAc, 0.0, 3.0, 30);
  } else if (name == "fig5a") {
    r.params = regime(0.3, 1.5, 2.0);
  } else if (name == "fig5b") {
    r.params = regime(0.2, 1.0, 2.0);
  } else if (name == "fig6") {
    r.params = regime(0.14, 1.0, 2.0);
    r.sweep = sweep(r.params, SweepParam::OmegaC, 1.5, 4.0, 25);
  } else {
    throw UnknownRecipe(std::string(name));
  }
  return r;
}

}  // namespace optosync
