#pragma once

// Two optical-fiber-coupled optomechanical cavities with a periodically
// modulated detuning. Units: hbar = k_B = 1, every rate in units of the
// first cavity detuning.
//
// Fluctuation basis (0-based): dq1, dp1, dx1, dy1, dq2, dp2, dx2, dy2 where
// dx, dy are the cavity quadratures. Vacuum variance is 1/2 per quadrature.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "optosync/error.hpp"

namespace optosync {

using Vector8 = Eigen::Matrix<double, 8, 1>;
using Matrix8 = Eigen::Matrix<double, 8, 8>;

/// Index of each quadrature inside Vector8 / Matrix8.
enum Quadrature : int { Q1 = 0, P1, X1, Y1, Q2, P2, X2, Y2 };

struct SystemParams {
  double delta1 = 1.0;
  double delta2 = 1.005;
  double omega1 = 1.0;
  double omega2 = 1.005;
  double g = 0.005;
  double gamma = 0.005;
  double kappa = 0.15;
  double E = 100.0;
  double lambda = 0.03;
  double A_c = 2.0;
  double omega_c = 3.0;
  double n_bath = 0.0;

  double delta(int j) const { return j == 1 ? delta1 : delta2; }
  double omega(int j) const { return j == 1 ? omega1 : omega2; }

  /// Period of the detuning modulation.
  double modulation_period() const { return 2.0 * std::numbers::pi / omega_c; }

  /// Throws InvalidParams when a field is outside its physical range.
  /// Zero damping and zero cavity loss are accepted (lossless limit).
  void validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    for (double x : {delta1, delta2, omega1, omega2, g, gamma, kappa, E, lambda, A_c, omega_c,
                     n_bath}) {
      if (!finite(x)) throw InvalidParams("parameters must be finite");
    }
    if (omega1 <= 0 || omega2 <= 0) throw InvalidParams("omega1, omega2 must be > 0");
    if (gamma < 0) throw InvalidParams("gamma must be >= 0");
    if (kappa < 0) throw InvalidParams("kappa must be >= 0");
    if (n_bath < 0) throw InvalidParams("n_bath must be >= 0");
    if (A_c < 0) throw InvalidParams("A_c must be >= 0");
    if (omega_c <= 0) throw InvalidParams("omega_c must be > 0");
    if (E < 0) throw InvalidParams("E must be >= 0");
  }

  bool operator==(const SystemParams&) const = default;
};

/// Baseline parameter set (in-phase synchronization regime).
inline SystemParams default_params() { return SystemParams{}; }

/// Mean values <q1>, <p1>, Re<a1>, Im<a1>, <q2>, <p2>, Re<a2>, Im<a2>.
struct MeanState {
  Vector8 v = Vector8::Zero();

  double q(int j) const { return v[j == 1 ? Q1 : Q2]; }
  double p(int j) const { return v[j == 1 ? P1 : P2]; }
  std::complex<double> a(int j) const {
    const int base = j == 1 ? X1 : X2;
    return {v[base], v[base + 1]};
  }

  void set_a(int j, std::complex<double> z) {
    const int base = j == 1 ? X1 : X2;
    v[base] = z.real();
    v[base + 1] = z.imag();
  }
};

/// Symmetrized second moments V_ij = <u_i u_j + u_j u_i> / 2.
struct CovMatrix {
  Matrix8 v = Matrix8::Zero();

  double operator()(int i, int j) const { return v(i, j); }

  static CovMatrix vacuum() { return CovMatrix{0.5 * Matrix8::Identity()}; }
};

/// Instantaneous effective detuning F_j = Delta_j [1 + A_c cos(omega_c t)] + g <q_j>.
inline double effective_detuning(const SystemParams& params, int j, double q_mean, double t) {
  return params.delta(j) * (1.0 + params.A_c * std::cos(params.omega_c * t)) + params.g * q_mean;
}

/// Linearized drift matrix of the fluctuations around mean state `s` at time `t`.
inline Matrix8 drift_matrix(const SystemParams& params, const MeanState& s, double t) {
  Matrix8 m = Matrix8::Zero();
  const double modulation = 1.0 + params.A_c * std::cos(params.omega_c * t);
  for (int j = 1; j <= 2; ++j) {
    const int o = j == 1 ? 0 : 4;
    const double w = params.omega(j);
    const double ga = std::numbers::sqrt2 * params.g;
    const std::complex<double> a = s.a(j);
    const double f = params.delta(j) * modulation + params.g * s.q(j);

    m(o + 0, o + 1) = w;

    m(o + 1, o + 0) = -w;
    m(o + 1, o + 1) = -params.gamma;
    m(o + 1, o + 2) = ga * a.real();
    m(o + 1, o + 3) = ga * a.imag();

    m(o + 2, o + 0) = -ga * a.imag();
    m(o + 2, o + 2) = -params.kappa;
    m(o + 2, o + 3) = -f;

    m(o + 3, o + 0) = ga * a.real();
    m(o + 3, o + 2) = f;
    m(o + 3, o + 3) = -params.kappa;
  }
  // Fiber coupling between the cavity quadratures.
  m(X1, Y2) = params.lambda;
  m(Y1, X2) = -params.lambda;
  m(X2, Y1) = params.lambda;
  m(Y2, X1) = -params.lambda;
  return m;
}

/// Diffusion matrix of the input noises; constant in time and state.
inline Matrix8 noise_matrix(const SystemParams& params) {
  const double mech = params.gamma * (2.0 * params.n_bath + 1.0);
  Vector8 d;
  d << 0.0, mech, params.kappa, params.kappa, 0.0, mech, params.kappa, params.kappa;
  return d.asDiagonal();
}

}  // namespace optosync
