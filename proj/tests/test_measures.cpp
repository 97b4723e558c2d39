#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "optosync/measures.hpp"
#include "oracles.hpp"

namespace optosync {
namespace {

constexpr double kPi = std::numbers::pi;

CovMatrix diag_cov(std::initializer_list<double> entries) {
  CovMatrix v;
  v.v.setZero();
  int i = 0;
  for (double e : entries) {
    v.v(i, i) = e;
    ++i;
  }
  return v;
}

CovMatrix with_pairs(double v15, double v26) {
  CovMatrix v = CovMatrix::vacuum();
  v.v(Q1, Q2) = v.v(Q2, Q1) = v15;
  v.v(P1, P2) = v.v(P2, P1) = v26;
  return v;
}

void expect_relative(double actual, double expected, double tol) {
  EXPECT_LE(std::abs(actual - expected), tol * std::abs(expected))
      << "actual " << actual << " expected " << expected;
}

TEST(PhaseOf, Quadrants) {
  EXPECT_EQ(phase_of(1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(phase_of(0.0, 1.0), kPi / 2);
  EXPECT_DOUBLE_EQ(phase_of(-1.0, -1.0), 5 * kPi / 4);
  EXPECT_DOUBLE_EQ(phase_of(1.0, -1.0), 7 * kPi / 4);
  EXPECT_THROW(phase_of(0.0, 0.0), DegeneratePhase);
}

TEST(WrapAngle, StaysInHalfOpenRange) {
  for (double a : {-1e-300, -kTwoPi, 0.0, kTwoPi, 3 * kTwoPi + 0.25, -7.5}) {
    const double w = wrap_angle(a);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, kTwoPi);
  }
}

TEST(SQ, Examples) {
  EXPECT_DOUBLE_EQ(s_q(CovMatrix::vacuum()), 1.0);
  const double sigma = 1.5;
  const CovMatrix thermal = diag_cov({sigma, sigma, 0.5, 0.5, sigma, sigma, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(s_q(thermal), 1.0 / (2 * sigma));
  EXPECT_THROW(s_q(with_pairs(0.5, 0.5)), NonPositiveDenominator);
}

TEST(SPhi, Examples) {
  const CovMatrix d = diag_cov({0.7, 0.9, 0.5, 0.5, 1.1, 0.6, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(s_phi(d, kPi), s_q(d));
  for (double phi : {0.0, 0.3, kPi, 4.0}) {
    EXPECT_DOUBLE_EQ(s_phi(CovMatrix::vacuum(), phi), 1.0);
  }
}

TEST(SP, Examples) {
  EXPECT_DOUBLE_EQ(s_p(CovMatrix::vacuum(), 0.4, 2.9), 1.0);
  const CovMatrix squeezed = diag_cov({0.5, 0.1, 0.5, 0.5, 0.5, 0.1, 0.5, 0.5});
  EXPECT_DOUBLE_EQ(s_p(squeezed, 0.0, 0.0), 5.0);
}

TEST(SAnti, Examples) {
  EXPECT_DOUBLE_EQ(s_anti(CovMatrix::vacuum()), 1.0);
  EXPECT_THROW(s_anti(with_pairs(-0.5, -0.5)), NonPositiveDenominator);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const CovMatrix v{oracle::random_covariance(rng)};
    EXPECT_EQ(s_anti(v), s_phi(v, kPi));
  }
}

TEST(SC, Examples) {
  std::mt19937_64 rng(13);
  const CovMatrix v{oracle::random_covariance(rng)};
  MeanState same;
  same.v << 3, -2, 10, 4, 3, -2, 9, 1;
  EXPECT_EQ(s_c(same, v), s_q(v));

  MeanState offset;
  offset.v[Q1] = std::numbers::sqrt2;
  EXPECT_DOUBLE_EQ(s_c(offset, CovMatrix::vacuum()), 0.5);
}

TEST(SC, NeverExceedsSQ) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 5.0);
  std::vector<MeanState> means(200);
  std::vector<CovMatrix> covs(200);
  for (std::size_t k = 0; k < means.size(); ++k) {
    for (int i = 0; i < 8; ++i) means[k].v[i] = normal(rng);
    covs[k].v = oracle::random_covariance(rng);
  }
  const std::vector<double> series = s_c(means, covs);
  ASSERT_EQ(series.size(), means.size());
  for (std::size_t k = 0; k < series.size(); ++k) EXPECT_LE(series[k], s_q(covs[k]));
}

TEST(MeasureIdentities, ClosedFormsMatchErrorOperatorVariances) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int trial = 0; trial < 1000; ++trial) {
    const CovMatrix v{oracle::random_covariance(rng)};
    const double phi = angle(rng);
    const double phi1 = angle(rng);
    const double phi2 = angle(rng);
    expect_relative(s_q(v), oracle::brute_s_q(v.v), 1e-12);
    expect_relative(s_phi(v, phi), oracle::brute_s_phi(v.v, 0.0, phi), 1e-12);
    expect_relative(s_anti(v), oracle::brute_s_anti(v.v), 1e-12);
    expect_relative(s_p(v, phi1, phi2), oracle::brute_s_p(v.v, phi1, phi2), 1e-12);
  }
}

TEST(MeasureIdentities, ZeroPhaseReducesToSQ) {
  std::mt19937_64 rng(99);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const CovMatrix v{oracle::random_symmetric(rng)};
    const double denom = detail::sync_denominator(v);
    EXPECT_EQ(detail::phi_denominator(v, 0.0), denom);
    if (denom > 1e-15) {
      EXPECT_EQ(s_phi(v, 0.0), s_q(v));
      ++compared;
    } else {
      EXPECT_THROW(s_phi(v, 0.0), NonPositiveDenominator);
      EXPECT_THROW(s_q(v), NonPositiveDenominator);
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(MeasureIdentities, PeriodicInPhase) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const CovMatrix v{oracle::random_covariance(rng)};
    const double phi = 0.01 * trial;
    expect_relative(s_phi(v, phi + kTwoPi), s_phi(v, phi), 1e-12);
    expect_relative(s_p(v, phi + kTwoPi, 1.0 - kTwoPi), s_p(v, phi, 1.0), 1e-12);
  }
}

TEST(MeasureIdentities, PhaseMeasureEqualsPhiMeasureWhenErrorsBalance) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int trial = 0; trial < 200; ++trial) {
    const double phi = angle(rng);
    const auto ops = oracle::rotated_errors(0.0, phi);
    ASSERT_NEAR(ops.q_minus.dot(ops.p_minus), 0.0, 1e-15);
    ASSERT_NEAR(ops.p_minus.squaredNorm(), 1.0, 1e-15);

    // Raise the momentum-error variance to match the position-error variance
    // without touching the latter.
    CovMatrix v{oracle::random_covariance(rng)};
    const double gap = oracle::variance(ops.q_minus, v.v) - oracle::variance(ops.p_minus, v.v);
    v.v += gap * ops.p_minus * ops.p_minus.transpose();
    expect_relative(s_p(v, 0.0, phi), s_phi(v, phi), 1e-11);
  }
}

TEST(CircularMean, InvariantUnderWholeTurns) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> around(0.2, 0.9);
  std::uniform_int_distribution<int> turns(-5, 5);
  std::vector<double> angles(50);
  std::vector<double> shifted(50);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    angles[i] = around(rng);
    shifted[i] = angles[i] + kTwoPi * turns(rng);
  }
  EXPECT_NEAR(circular_mean(angles), circular_mean(shifted), 1e-12);
  EXPECT_NEAR(circular_mean(std::vector<double>{kTwoPi - 0.1, 0.1}), 0.0, 1e-12);
}

std::vector<double> grid(double from, double to, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = from + (to - from) * i / (n - 1);
  return t;
}

TEST(TimeAverage, Examples) {
  const auto t = grid(0.0, 10.0, 101);
  EXPECT_DOUBLE_EQ(time_average(t, std::vector<double>(t.size(), 2.5), {0.0, 10.0}), 2.5);

  const double w = 2.0;
  const double period = kTwoPi / w;
  const auto ts = grid(0.0, period, 400);
  std::vector<double> sine(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) sine[i] = std::sin(w * ts[i]);
  EXPECT_NEAR(time_average(ts, sine, {0.0, period}), 0.0, 1e-8);

  std::vector<double> ramp(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) ramp[i] = 1.0 + 3.0 * t[i];
  EXPECT_NEAR(time_average(t, ramp, {0.0, 10.0}), 1.0 + 3.0 * 10.0 / 2, 1e-12);
  // Window edges falling between samples.
  EXPECT_NEAR(time_average(t, ramp, {2.05, 7.33}), 1.0 + 3.0 * (2.05 + 7.33) / 2, 1e-12);
}

TEST(TimeAverage, RejectsEmptyWindows) {
  const auto t = grid(0.0, 10.0, 11);
  const std::vector<double> v(t.size(), 1.0);
  EXPECT_THROW(time_average(t, v, {5.0, 5.0}), EmptyWindow);
  EXPECT_THROW(time_average(t, v, {11.0, 12.0}), EmptyWindow);
  EXPECT_THROW(time_average(t, v, {-3.0, -1.0}), EmptyWindow);
}

TEST(RunningAverage, TracksCumulativeMean) {
  const auto t = grid(0.0, 4.0, 5);
  const std::vector<double> v = {0.0, 1.0, 2.0, 3.0, 4.0};
  const auto avg = running_average(t, v);
  EXPECT_EQ(avg[0], 0.0);
  EXPECT_DOUBLE_EQ(avg[4], 2.0);
  EXPECT_DOUBLE_EQ(avg[2], 1.0);
}

/// Synthetic trajectory sampled every `h` with mean state f(t).
template <class F>
Trajectory synthetic(const SystemParams& p, double h, int samples, F&& f) {
  Trajectory traj;
  traj.params = p;
  traj.dt = h;
  traj.record_stride = 1;
  for (int k = 0; k < samples; ++k) {
    const double t = k * h;
    traj.times.push_back(t);
    traj.means.push_back(MeanState{f(t)});
    traj.covs.push_back(CovMatrix::vacuum());
  }
  return traj;
}

TEST(SteadyState, PeriodicSignalIsSteadyFromTheStart) {
  const SystemParams p = default_params();
  const double period = p.modulation_period();
  const double h = period / 40;
  const Trajectory traj = synthetic(p, h, 40 * 20 + 1, [&](double t) {
    Vector8 v;
    const double x = p.omega_c * t;
    v << 300 * std::cos(x), -200 * std::sin(x), 50 + std::cos(2 * x), 3, 250 * std::cos(x + 0.1),
        -150 * std::sin(x), 40, 2 * std::sin(x);
    return v;
  });
  const SteadyStateInfo info = detect_steady_state(traj, p, 1e-3);
  EXPECT_TRUE(info.reached);
  EXPECT_EQ(info.period_multiple, 1);
  EXPECT_DOUBLE_EQ(info.period_used, period);
  EXPECT_EQ(info.onset_time, 0.0);
  EXPECT_LT(info.residual, 1e-12);
}

TEST(SteadyState, SubharmonicCycleUsesTheTruePeriod) {
  const SystemParams p = default_params();
  const double period = p.modulation_period();
  const double h = period / 30;
  const Trajectory traj = synthetic(p, h, 30 * 30 + 1, [&](double t) {
    Vector8 v = Vector8::Zero();
    v[Q1] = 700 * std::cos(p.omega_c * t / 3);
    v[P1] = -700 * std::sin(p.omega_c * t / 3);
    return v;
  });
  const SteadyStateInfo info = detect_steady_state(traj, p, 1e-3);
  EXPECT_TRUE(info.reached);
  EXPECT_EQ(info.period_multiple, 3);
  EXPECT_NEAR(info.period_used, 3 * period, 1e-12);
}

TEST(SteadyState, ExponentialDecayOnset) {
  const SystemParams p = default_params();
  const double period = p.modulation_period();
  const double h = period / 100;
  const double tol = 1e-3;
  const Trajectory traj = synthetic(p, h, 100 * 20 + 1, [](double t) {
    Vector8 v = Vector8::Zero();
    v[Q1] = std::exp(-t);
    return v;
  });
  const SteadyStateInfo info = detect_steady_state(traj, p, tol);
  const double predicted = std::log((1.0 - std::exp(-period)) / tol);
  EXPECT_TRUE(info.reached);
  EXPECT_EQ(info.period_multiple, 1);
  EXPECT_GE(info.onset_time, predicted - 1e-9);
  EXPECT_LE(info.onset_time, predicted + h + 1e-9);
}

TEST(SteadyState, DriftingSignalIsNotSteady) {
  const SystemParams p = default_params();
  const Trajectory traj = synthetic(p, 0.05, 2000, [](double t) {
    Vector8 v = Vector8::Zero();
    v[Q1] = 10 * t;
    return v;
  });
  const SteadyStateInfo info = detect_steady_state(traj, p, 1e-3);
  EXPECT_FALSE(info.reached);
  EXPECT_EQ(info.onset_time, traj.t_end());
}

TEST(SteadyState, RejectsShortTrajectories) {
  const SystemParams p = default_params();
  const Trajectory traj =
      synthetic(p, 0.01, 100, [](double) { return Vector8(Vector8::Ones()); });
  EXPECT_THROW(detect_steady_state(traj, p, 1e-3), TooShort);
}

TEST(SteadyWindow, WholePeriodsAfterTransient) {
  const SystemParams p = default_params();
  const Trajectory traj =
      synthetic(p, 0.01, 10001, [](double) { return Vector8(Vector8::Ones()); });
  const double period = p.modulation_period();
  const TimeWindow w = steady_window(traj, 0.6, period);
  EXPECT_DOUBLE_EQ(w.end, traj.t_end());
  EXPECT_GE(w.begin, 0.6 * traj.t_end() - 1e-9);
  const double periods = w.length() / period;
  EXPECT_NEAR(periods, std::round(periods), 1e-9);
  EXPECT_LT(w.begin - period, 0.6 * traj.t_end());
  EXPECT_THROW(steady_window(traj, 0.99999, period), EmptyWindow);
}

TEST(PhaseSeries, IdenticalSubsystemsAreInPhase) {
  const SystemParams p = default_params();
  const Trajectory traj = synthetic(p, 0.05, 400, [](double t) {
    Vector8 v = Vector8::Zero();
    v[Q1] = v[Q2] = 5 + 700 * std::cos(t);
    v[P1] = v[P2] = -700 * std::sin(t);
    return v;
  });
  const PhaseSeries ps = phase_series(traj, {5.0, 15.0});
  EXPECT_NEAR(std::remainder(ps.summary_phi, kTwoPi), 0.0, 1e-3);
  for (double t : ps.times) {
    EXPECT_GE(t, 5.0);
    EXPECT_LE(t, 15.0);
  }
}

TEST(PhaseSeries, PointReflectionGivesPi) {
  const SystemParams p = default_params();
  const Trajectory traj = synthetic(p, 0.05, 400, [](double t) {
    Vector8 v = Vector8::Zero();
    v[Q1] = 3 + 70 * std::cos(t);
    v[P1] = -50 * std::sin(t);
    v[Q2] = -v[Q1];
    v[P2] = -v[P1];
    return v;
  });
  const PhaseSeries ps = phase_series(traj, {0.0, traj.t_end()});
  EXPECT_NEAR(ps.summary_phi, kPi, 1e-12);
}

TEST(PhaseSeries, OriginInsideWindowIsReported) {
  const SystemParams p = default_params();
  const Trajectory traj = synthetic(p, 0.05, 400, [](double) { return Vector8(Vector8::Zero()); });
  EXPECT_THROW(phase_series(traj, {1.0, 2.0}), DegeneratePhase);
  EXPECT_THROW(phase_series(traj, {100.0, 200.0}), EmptyWindow);
}

TEST(ComputeMeasures, DynamicsRespectHeisenbergBound) {
  const Trajectory traj = simulate(default_params(), CovMatrix::vacuum(), 300.0, 0.004, 25);
  const MeasureSeries m = compute_measures(traj, 0.3);
  ASSERT_EQ(m.s_q.size(), traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_LE(m.s_q[k], 1.0 + 1e-9);
    EXPECT_LE(m.s_phi[k], 1.0 + 1e-9);
    EXPECT_LE(m.s_anti[k], 1.0 + 1e-9);
    EXPECT_LE(m.s_c[k], m.s_q[k]);
    EXPECT_TRUE(std::isfinite(m.s_p[k]));
    EXPECT_TRUE(std::isfinite(m.avg_s_p[k]));
  }
  // Starts from rest: the phases fall back to zero until the means move.
  EXPECT_EQ(m.phase.front().phi1, 0.0);
  EXPECT_DOUBLE_EQ(m.s_q.front(), 1.0);
}

}  // namespace
}  // namespace optosync
