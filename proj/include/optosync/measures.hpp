#pragma once

// Synchronization measures evaluated from the fluctuation covariance and
// the mean-field phases, plus the windowing and steady-state machinery used
// to turn a trajectory into time-averaged numbers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optosync/dynamics.hpp"

namespace optosync {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces an angle into [0, 2pi).
inline double wrap_angle(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0) r += kTwoPi;
  // fmod of a tiny negative value can land exactly on 2pi after the shift.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Quadrant-correct phase of the point (q, p), in [0, 2pi).
inline double phase_of(double q, double p) {
  constexpr double kTiny = 1e-12;
  if (std::abs(q) < kTiny && std::abs(p) < kTiny) {
    throw DegeneratePhase("phase undefined at the origin of phase space");
  }
  return wrap_angle(std::atan2(p, q));
}

struct PhaseInfo {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi = 0.0;  ///< (phi2 - phi1) mod 2pi
};

inline PhaseInfo phase_info(const MeanState& s) {
  PhaseInfo info;
  info.phi1 = phase_of(s.q(1), s.p(1));
  info.phi2 = phase_of(s.q(2), s.p(2));
  info.phi = wrap_angle(info.phi2 - info.phi1);
  return info;
}

/// arg(sum exp(i angle)) in [0, 2pi).
inline double circular_mean(std::span<const double> angles) {
  double c = 0.0;
  double s = 0.0;
  for (double a : angles) {
    c += std::cos(a);
    s += std::sin(a);
  }
  return wrap_angle(std::atan2(s, c));
}

namespace detail {

inline double invert_denominator(double denom) {
  constexpr double kMinDenominator = 1e-15;
  if (!(denom > kMinDenominator)) throw NonPositiveDenominator(denom);
  return 1.0 / denom;
}

inline double local_variances(const CovMatrix& v) {
  return v(Q1, Q1) + v(P1, P1) + v(Q2, Q2) + v(P2, P2);
}

/// <dq1 dq2 + dp1 dp2> counted from both triangles.
inline double in_phase_correlation(const CovMatrix& v) {
  return v(Q1, Q2) + v(Q2, Q1) + v(P1, P2) + v(P2, P1);
}

/// <dq_-^2 + dp_-^2> for the plain error operators.
inline double sync_denominator(const CovMatrix& v) {
  return 0.5 * (local_variances(v) - in_phase_correlation(v));
}

/// Shares its evaluation order with sync_denominator so phi = 0 reproduces
/// it bit for bit.
inline double phi_denominator(const CovMatrix& v, double phi) {
  const double quadrature = v(P1, Q2) + v(Q2, P1) - v(Q1, P2) - v(P2, Q1);
  return 0.5 * (local_variances(v) - std::cos(phi) * in_phase_correlation(v) +
                std::sin(phi) * quadrature);
}

inline double phase_denominator(const CovMatrix& v, double phi1, double phi2) {
  const double s1 = std::sin(phi1);
  const double c1 = std::cos(phi1);
  const double s2 = std::sin(phi2);
  const double c2 = std::cos(phi2);
  return v(Q1, Q1) * s1 * s1 + v(P1, P1) * c1 * c1 + v(Q2, Q2) * s2 * s2 + v(P2, P2) * c2 * c2 -
         2.0 * v(Q1, P1) * s1 * c1 - 2.0 * v(Q1, Q2) * s1 * s2 + 2.0 * v(Q1, P2) * s1 * c2 +
         2.0 * v(P1, Q2) * c1 * s2 - 2.0 * v(P1, P2) * c1 * c2 - 2.0 * v(Q2, P2) * c2 * s2;
}

}  // namespace detail

/// Quantum complete synchronization of the fluctuations.
inline double s_q(const CovMatrix& v) {
  return detail::invert_denominator(detail::sync_denominator(v));
}

/// Quantum phi-synchronization; `phi` is the phase difference phi2 - phi1.
inline double s_phi(const CovMatrix& v, double phi) {
  return detail::invert_denominator(detail::phi_denominator(v, phi));
}

/// Quantum phase synchronization with per-subsystem phases. Not bounded by 1.
inline double s_p(const CovMatrix& v, double phi1, double phi2) {
  return detail::invert_denominator(detail::phase_denominator(v, phi1, phi2));
}

/// Quantum anti-synchronization: phi-synchronization at phi = pi.
inline double s_anti(const CovMatrix& v) { return s_phi(v, std::numbers::pi); }

/// Complete synchronization including the classical mean error.
inline double s_c(const MeanState& mean, const CovMatrix& v) {
  const double q_minus = (mean.q(1) - mean.q(2)) / std::numbers::sqrt2;
  const double p_minus = (mean.p(1) - mean.p(2)) / std::numbers::sqrt2;
  return detail::invert_denominator(q_minus * q_minus + p_minus * p_minus +
                                    detail::sync_denominator(v));
}

/// Pointwise s_c over aligned windows of means and covariances.
inline std::vector<double> s_c(std::span<const MeanState> means, std::span<const CovMatrix> covs) {
  if (means.empty() || means.size() != covs.size()) {
    throw EmptyWindow("s_c: windows must be aligned and non-empty");
  }
  std::vector<double> out;
  out.reserve(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) out.push_back(s_c(means[k], covs[k]));
  return out;
}

/// phi-synchronization including the mean phi-errors, with the rotation
/// taken at the given per-subsystem phases.
inline double s_phi_full(const MeanState& mean, const CovMatrix& v, double phi1, double phi2) {
  auto rotated = [&](int j, double phase) {
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    return std::pair{mean.q(j) * c + mean.p(j) * s, mean.p(j) * c - mean.q(j) * s};
  };
  const auto [q1, p1] = rotated(1, phi1);
  const auto [q2, p2] = rotated(2, phi2);
  const double q_minus = (q1 - q2) / std::numbers::sqrt2;
  const double p_minus = (p1 - p2) / std::numbers::sqrt2;
  return detail::invert_denominator(q_minus * q_minus + p_minus * p_minus +
                                    detail::phi_denominator(v, phi2 - phi1));
}

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;

  double length() const { return end - begin; }
  bool contains(double t) const { return t >= begin && t <= end; }
};

/// Trapezoidal mean of `values` over `window`. Window edges falling between
/// samples are handled by linear interpolation.
inline double time_average(std::span<const double> times, std::span<const double> values,
                           TimeWindow window) {
  if (times.size() != values.size() || times.size() < 2) {
    throw EmptyWindow("time_average: need at least two aligned samples");
  }
  constexpr double kSlack = 1e-9;
  if (!(window.length() > 0) || window.begin < times.front() - kSlack ||
      window.end > times.back() + kSlack) {
    throw EmptyWindow("time_average: window is empty or outside the series");
  }
  const double begin = std::max(window.begin, times.front());
  const double end = std::min(window.end, times.back());

  auto value_at = [&](double t) {
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end()) return values.back();
    if (it == times.begin()) return values.front();
    const auto hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return values[lo] + w * (values[hi] - values[lo]);
  };

  double integral = 0.0;
  double prev_t = begin;
  double prev_v = value_at(begin);
  auto it = std::upper_bound(times.begin(), times.end(), begin);
  for (; it != times.end() && *it < end; ++it) {
    const auto k = static_cast<std::size_t>(it - times.begin());
    integral += 0.5 * (times[k] - prev_t) * (values[k] + prev_v);
    prev_t = times[k];
    prev_v = values[k];
  }
  integral += 0.5 * (end - prev_t) * (value_at(end) + prev_v);
  return integral / (end - begin);
}

/// Cumulative trapezoidal mean from the first sample: out[k] is the average
/// of the series over [times[0], times[k]].
inline std::vector<double> running_average(std::span<const double> times,
                                           std::span<const double> values) {
  std::vector<double> out(values.size());
  if (values.empty()) return out;
  out[0] = values[0];
  double integral = 0.0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    integral += 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
    out[k] = integral / (times[k] - times[0]);
  }
  return out;
}

struct PhaseSeries {
  std::vector<double> times;
  std::vector<PhaseInfo> phases;
  double summary_phi = 0.0;  ///< circular mean of phi over the window
};

/// Phases of every recorded sample inside `window` and their circular mean.
inline PhaseSeries phase_series(const Trajectory& traj, TimeWindow window) {
  PhaseSeries out;
  std::vector<double> diffs;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    if (!window.contains(t)) continue;
    try {
      out.phases.push_back(phase_info(traj.means[k]));
    } catch (const DegeneratePhase&) {
      throw DegeneratePhase("phase undefined at t = " + std::to_string(t));
    }
    out.times.push_back(t);
    diffs.push_back(out.phases.back().phi);
  }
  if (diffs.empty()) throw EmptyWindow("phase_series: no samples inside the window");
  out.summary_phi = circular_mean(diffs);
  return out;
}

struct SteadyStateInfo {
  bool reached = false;
  double onset_time = 0.0;
  /// Comparison lag: the shortest whole number of modulation periods over
  /// which the mean state repeats (the modulation period when none does).
  double period_used = 0.0;
  int period_multiple = 1;
  double residual = 0.0;
};

namespace detail {

/// Mean state at fractional sample position `x` (cubic Lagrange, linear at
/// the edges, exact at integer positions).
inline Vector8 interpolate_mean(const Trajectory& traj, double x) {
  const auto n = static_cast<long long>(traj.size());
  auto m = static_cast<long long>(std::floor(x));
  const double frac = x - static_cast<double>(m);
  if (frac < 1e-9) return traj.means[static_cast<std::size_t>(std::clamp(m, 0LL, n - 1))].v;
  if (frac > 1.0 - 1e-9) {
    return traj.means[static_cast<std::size_t>(std::clamp(m + 1, 0LL, n - 1))].v;
  }
  auto at = [&](long long i) -> const Vector8& { return traj.means[static_cast<std::size_t>(i)].v; };
  if (m < 1 || m + 2 >= n) {
    return (1.0 - frac) * at(m) + frac * at(std::min(m + 1, n - 1));
  }
  const double u = frac;
  const double w0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
  const double w1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
  const double w2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
  const double w3 = (u + 1.0) * u * (u - 1.0) / 6.0;
  return w0 * at(m - 1) + w1 * at(m) + w2 * at(m + 1) + w3 * at(m + 2);
}

/// Relative distance between the sample k and the state `lag` later.
/// Normalized by max(1, |s|) so decaying states are compared absolutely.
inline double lag_residual(const Trajectory& traj, std::size_t k, double lag_samples) {
  const Vector8& now = traj.means[k].v;
  const Vector8 later = interpolate_mean(traj, static_cast<double>(k) + lag_samples);
  return (later - now).norm() / std::max(1.0, now.norm());
}

}  // namespace detail

/// Finds where the mean-field motion becomes periodic. Candidate lags are
/// 1..max_multiple modulation periods; the shortest lag whose residual over
/// the final two lags is below `steady_tol` wins. Throws TooShort when the
/// trajectory spans fewer than ten modulation periods.
inline SteadyStateInfo detect_steady_state(const Trajectory& traj, const SystemParams& params,
                                           double steady_tol, int max_multiple = 8) {
  const double period = params.modulation_period();
  if (traj.size() < 2 || traj.t_end() - traj.times.front() < 10.0 * period - 1e-9) {
    throw TooShort("steady-state detection needs at least 10 modulation periods");
  }
  const double h = traj.times[1] - traj.times[0];
  const double span = traj.t_end() - traj.times.front();
  const auto n = traj.size();

  struct Candidate {
    int multiple;
    double lag_samples;
    double residual;
  };
  auto evaluate = [&](int multiple) {
    const double lag_samples = multiple * period / h;
    // Comparison start times covering the final two lags.
    const double last_start = static_cast<double>(n - 1) - lag_samples;
    const double first_start = std::max(0.0, last_start - 2.0 * lag_samples);
    double worst = 0.0;
    for (auto k = static_cast<std::size_t>(std::ceil(first_start - 1e-9));
         static_cast<double>(k) <= last_start + 1e-9; ++k) {
      worst = std::max(worst, detail::lag_residual(traj, k, lag_samples));
    }
    return Candidate{multiple, lag_samples, worst};
  };

  std::optional<Candidate> chosen;
  const Candidate first = evaluate(1);
  if (first.residual < steady_tol) chosen = first;
  for (int m = 2; !chosen && m <= max_multiple && 3.0 * m * period <= span; ++m) {
    const Candidate c = evaluate(m);
    if (c.residual < steady_tol) chosen = c;
  }

  SteadyStateInfo info;
  if (!chosen) {
    info.reached = false;
    info.onset_time = traj.t_end();
    info.period_used = period;
    info.period_multiple = 1;
    info.residual = first.residual;
    return info;
  }

  info.reached = true;
  info.period_multiple = chosen->multiple;
  info.period_used = chosen->multiple * period;
  info.residual = chosen->residual;
  // Walk back from the last comparable sample to the last violation.
  const double last_start = static_cast<double>(n - 1) - chosen->lag_samples;
  auto k = static_cast<long long>(std::floor(last_start + 1e-9));
  while (k >= 0 &&
         detail::lag_residual(traj, static_cast<std::size_t>(k), chosen->lag_samples) < steady_tol) {
    --k;
  }
  info.onset_time = traj.times[static_cast<std::size_t>(k + 1)];
  return info;
}

/// Averaging window: drop the leading `transient_fraction` of the run and
/// keep the largest whole number of `period`s that ends at the last sample.
inline TimeWindow steady_window(const Trajectory& traj, double transient_fraction, double period) {
  if (traj.size() < 2) throw EmptyWindow("steady_window: trajectory too short");
  const double t0 = traj.times.front();
  const double t_end = traj.t_end();
  const double available = (t_end - t0) * (1.0 - transient_fraction);
  const double whole = std::floor(available / period + 1e-9);
  if (whole < 1) throw EmptyWindow("steady_window: less than one period after the transient");
  return TimeWindow{t_end - whole * period, t_end};
}

/// Per-sample measures of a trajectory. `s_phi` uses the single summary
/// phase difference `phi`; `s_p` uses the instantaneous phases.
struct MeasureSeries {
  std::vector<double> times;
  std::vector<double> s_q, s_phi, s_p, s_anti, s_c;
  std::vector<PhaseInfo> phase;
  std::vector<double> avg_s_q, avg_s_phi, avg_s_p, avg_s_anti, avg_s_c;
  double phi = 0.0;
};

/// Evaluates every measure at every recorded sample. Where a subsystem sits
/// at the phase-space origin (t = 0 from rest) the previous sample's phase
/// is carried forward, starting from zero.
inline MeasureSeries compute_measures(const Trajectory& traj, double phi) {
  MeasureSeries out;
  out.phi = phi;
  out.times = traj.times;
  const std::size_t n = traj.size();
  for (auto* series : {&out.s_q, &out.s_phi, &out.s_p, &out.s_anti, &out.s_c}) series->reserve(n);
  out.phase.reserve(n);

  double last1 = 0.0;
  double last2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const MeanState& mean = traj.means[k];
    const CovMatrix& cov = traj.covs[k];
    PhaseInfo info;
    try {
      info.phi1 = phase_of(mean.q(1), mean.p(1));
    } catch (const DegeneratePhase&) {
      info.phi1 = last1;
    }
    try {
      info.phi2 = phase_of(mean.q(2), mean.p(2));
    } catch (const DegeneratePhase&) {
      info.phi2 = last2;
    }
    info.phi = wrap_angle(info.phi2 - info.phi1);
    last1 = info.phi1;
    last2 = info.phi2;

    out.phase.push_back(info);
    out.s_q.push_back(s_q(cov));
    out.s_phi.push_back(s_phi(cov, phi));
    out.s_p.push_back(s_p(cov, info.phi1, info.phi2));
    out.s_anti.push_back(s_anti(cov));
    out.s_c.push_back(s_c(mean, cov));
  }
  out.avg_s_q = running_average(out.times, out.s_q);
  out.avg_s_phi = running_average(out.times, out.s_phi);
  out.avg_s_p = running_average(out.times, out.s_p);
  out.avg_s_anti = running_average(out.times, out.s_anti);
  out.avg_s_c = running_average(out.times, out.s_c);
  return out;
}

}  // namespace optosync
