#pragma once

// Fixed-step RK4 propagation of the mean-field equations and the covariance
// equation dV/dt = M V + V M^T + N, integrated in lockstep: every RK stage
// builds M from the stage mean state at the stage time.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "optosync/model.hpp"

namespace optosync {

/// Time derivative of the mean values.
inline Vector8 mean_rhs(const SystemParams& params, const MeanState& s, double t) {
  using namespace std::complex_literals;
  Vector8 d;
  const double modulation = 1.0 + params.A_c * std::cos(params.omega_c * t);
  for (int j = 1; j <= 2; ++j) {
    const int o = j == 1 ? 0 : 4;
    const double w = params.omega(j);
    const std::complex<double> a = s.a(j);
    const std::complex<double> other = s.a(3 - j);

    d[o + 0] = w * s.p(j);
    d[o + 1] = -w * s.q(j) - params.gamma * s.p(j) + params.g * std::norm(a);
    const std::complex<double> da = -(params.kappa - 1i * params.delta(j) * modulation) * a +
                                    1i * params.g * a * s.q(j) + params.E -
                                    1i * params.lambda * other;
    d[o + 2] = da.real();
    d[o + 3] = da.imag();
  }
  return d;
}

/// M V + V M^T + N. With V symmetric the result is exactly symmetric.
inline Matrix8 cov_rhs(const Matrix8& m, const Matrix8& v, const Matrix8& n) {
  const Matrix8 mv = m * v;
  return mv + mv.transpose() + n;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<MeanState> means;
  std::vector<CovMatrix> covs;
  SystemParams params;
  double dt = 0.0;
  int record_stride = 1;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  double t_end() const { return times.empty() ? 0.0 : times.back(); }
  double sample_spacing() const { return dt * record_stride; }
};

/// Number of RK4 steps taken for a run to at least `t_end`, rounded up to a
/// whole number of recording strides so the last step is always recorded.
inline long long step_count(double t_end, double dt, int record_stride) {
  auto steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
  steps = std::max<long long>(steps, 1);
  const long long rem = steps % record_stride;
  if (rem != 0) steps += record_stride - rem;
  return steps;
}

/// Integrates from a zero mean state and covariance `v0`. Samples are kept
/// every `record_stride` steps, t = 0 included. Throws NonFinite with the
/// first offending time if the state blows up.
inline Trajectory simulate(const SystemParams& params, const CovMatrix& v0, double t_end,
                           double dt, int record_stride) {
  params.validate();
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidParams("dt must be > 0");
  if (!(t_end >= dt)) throw InvalidParams("t_end must be >= dt");
  if (record_stride < 1) throw InvalidParams("record_stride must be >= 1");

  const long long steps = step_count(t_end, dt, record_stride);
  const Matrix8 noise = noise_matrix(params);

  Trajectory traj;
  traj.params = params;
  traj.dt = dt;
  traj.record_stride = record_stride;
  const auto samples = static_cast<std::size_t>(steps / record_stride + 1);
  traj.times.reserve(samples);
  traj.means.reserve(samples);
  traj.covs.reserve(samples);

  MeanState s;
  Matrix8 v = v0.v;
  traj.times.push_back(0.0);
  traj.means.push_back(s);
  traj.covs.push_back(CovMatrix{v});

  auto stage = [&](const Vector8& mean, const Matrix8& cov, double t, Vector8& dmean,
                   Matrix8& dcov) {
    const MeanState ms{mean};
    dmean = mean_rhs(params, ms, t);
    dcov = cov_rhs(drift_matrix(params, ms, t), cov, noise);
  };

  Vector8 k1, k2, k3, k4;
  Matrix8 c1, c2, c3, c4;
  const double half = 0.5 * dt;
  for (long long step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    stage(s.v, v, t, k1, c1);
    stage(s.v + half * k1, v + half * c1, t + half, k2, c2);
    stage(s.v + half * k2, v + half * c2, t + half, k3, c3);
    stage(s.v + dt * k3, v + dt * c3, t + dt, k4, c4);
    s.v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    v += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
    v = 0.5 * (v + v.transpose()).eval();

    const double t_next = static_cast<double>(step + 1) * dt;
    if (!s.v.allFinite() || !v.allFinite()) throw NonFinite(t_next);
    if ((step + 1) % record_stride == 0) {
      traj.times.push_back(t_next);
      traj.means.push_back(s);
      traj.covs.push_back(CovMatrix{v});
    }
  }
  return traj;
}

/// Largest real part over the eigenvalues of a square matrix. Real parts
/// within round-off of zero are reported as exactly zero (marginal).
inline double max_real_eigenvalue(const Matrix8& m) {
  Eigen::EigenSolver<Matrix8> solver(m, /*computeEigenvectors=*/false);
  const double worst = solver.eigenvalues().real().maxCoeff();
  const double roundoff = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  return std::abs(worst) <= roundoff ? 0.0 : worst;
}

struct StabilityReport {
  std::vector<double> sample_times;
  std::vector<double> max_real_eig;
  bool all_negative = false;

  double worst() const {
    return max_real_eig.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : *std::max_element(max_real_eig.begin(), max_real_eig.end());
  }
};

/// Evaluates M(t) at `n_samples` evenly spaced recorded times inside the last
/// modulation period of `traj` (fewer if the period holds fewer samples).
inline StabilityReport stability_scan(const SystemParams& params, const Trajectory& traj,
                                      int n_samples) {
  if (traj.empty()) throw InvalidParams("stability_scan: empty trajectory");
  if (n_samples < 1) throw InvalidParams("stability_scan: n_samples must be >= 1");

  const double t_last = traj.times.back();
  const double t_first = t_last - params.modulation_period();
  std::size_t lo = traj.size() - 1;
  while (lo > 0 && traj.times[lo - 1] >= t_first) --lo;
  const std::size_t available = traj.size() - lo;
  const auto count = std::min<std::size_t>(available, static_cast<std::size_t>(n_samples));

  StabilityReport report;
  report.all_negative = true;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx =
        count == 1 ? traj.size() - 1 : lo + (k * (available - 1)) / (count - 1);
    const double t = traj.times[idx];
    const double worst = max_real_eigenvalue(drift_matrix(params, traj.means[idx], t));
    report.sample_times.push_back(t);
    report.max_real_eig.push_back(worst);
    if (!(worst < 0)) report.all_negative = false;
  }
  return report;
}

}  // namespace optosync
