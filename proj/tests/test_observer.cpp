#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bilat/observer.hpp"

using namespace bilat;

namespace {

/// 1-DOF rigid plant with known constant inertia, driven by tau_u plus an
/// external torque, integrated much finer than the observer runs.
struct OnePlant {
  double M = 0.02;
  double q = 0.0;
  double qd = 0.0;

  void advance(double tau_u, double tau_ext, double dt_ctrl, int substeps) {
    double h = dt_ctrl / substeps;
    for (int i = 0; i < substeps; ++i) {
      double qdd = (tau_u + tau_ext) / M;
      qd += qdd * h;
      q += qd * h;
    }
  }
};

}  // namespace

TEST_CASE("external torque step is recovered within 1e-3 after 0.1 s, monotonically") {
  ObserverConfig cfg;  // omega_c 50, zeta 1, 1 kHz
  VelocityForceObserver obs(cfg, 1);
  OnePlant plant;
  Mat M = Mat::Constant(1, 1, plant.M);
  Mat M_inv = M.inverse();

  const double tau_ext = 1.0;
  const double w = cfg.omega_c;
  Vec tau_u = Vec::Zero(1);
  double prev_hat = 0.0;
  double overshoot = 0.0;
  double worst_vs_oracle = 0.0;
  double band_entry = -1.0;  // first time the estimate stays within 1e-3
  for (int k = 1; k <= 500; ++k) {
    plant.advance(tau_u[0], tau_ext, cfg.dt, 100);
    Vec theta = Vec::Constant(1, plant.q);
    Vec tau_hat = obs.force_step(theta, tau_u, M, M_inv);
    double t = k * cfg.dt;
    // Critically damped: the estimate may never cross the target.
    overshoot = std::max(overshoot, tau_hat[0] - tau_ext);
    CHECK(tau_hat[0] >= prev_hat - 1e-9);  // monotone approach
    prev_hat = tau_hat[0];
    if (t >= 0.1) {
      double oracle = tau_ext * (1.0 - (1.0 + w * t) * std::exp(-w * t));
      worst_vs_oracle = std::max(worst_vs_oracle, std::abs(tau_hat[0] - oracle));
    }
    if (band_entry < 0.0 && std::abs(tau_hat[0] - tau_ext) < 1e-3) band_entry = t;
  }
  // Discretization agrees with the continuous oracle once the first-tick
  // transient has passed; the truth band is reached when the critically
  // damped pair at omega_c allows ((1 + w t) e^{-w t} = 1e-3 at w t = 9.2).
  CHECK(worst_vs_oracle < 1e-3);
  CHECK(band_entry > 0.0);
  CHECK(band_entry < 0.2);
  CHECK(overshoot < 1e-6);
  CHECK(std::abs(prev_hat - tau_ext) < 1e-6);  // converged at 0.5 s
}

TEST_CASE("force estimate follows the critically damped continuous oracle") {
  // With tau_u = 0 and constant tau_ext, the estimate obeys
  //   tau_hat(t) = tau_ext (1 - (1 + w t) exp(-w t)),
  // the step response of (w/(s+w))^2.
  ObserverConfig cfg;
  VelocityForceObserver obs(cfg, 1);
  OnePlant plant;
  Mat M = Mat::Constant(1, 1, plant.M);
  Mat M_inv = M.inverse();

  const double w = cfg.omega_c;
  double worst = 0.0;
  for (int k = 1; k <= 400; ++k) {
    plant.advance(0.0, 0.7, cfg.dt, 100);
    Vec tau_hat = obs.force_step(Vec::Constant(1, plant.q), Vec::Zero(1), M, M_inv);
    double t = k * cfg.dt;
    double oracle = 0.7 * (1.0 - (1.0 + w * t) * std::exp(-w * t));
    worst = std::max(worst, std::abs(tau_hat[0] - oracle));
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("velocity estimate converges on the true velocity") {
  ObserverConfig cfg;
  VelocityForceObserver obs(cfg, 1);
  OnePlant plant;
  Mat M = Mat::Constant(1, 1, plant.M);
  Mat M_inv = M.inverse();

  // Drive the plant with a known smooth torque; accel_ref is exact here
  // because the model matches the plant and tau_ext = 0.
  Vec tau_u = Vec::Zero(1);
  double worst_tail = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    double t = k * cfg.dt;
    tau_u[0] = 0.05 * std::sin(4.0 * t);
    plant.advance(tau_u[0], 0.0, cfg.dt, 100);
    Vec accel_ref = Vec::Constant(1, tau_u[0] / plant.M);
    Vec vel_hat = obs.velocity_step(Vec::Constant(1, plant.q), accel_ref);
    if (k > 300) worst_tail = std::max(worst_tail, std::abs(vel_hat[0] - plant.qd));
  }
  CHECK(worst_tail < 2e-3);
}

TEST_CASE("update() equals velocity_step then force_step") {
  ObserverConfig cfg;
  VelocityForceObserver a(cfg, 2);
  VelocityForceObserver b(cfg, 2);
  Mat M = Vec::Constant(2, 0.05).asDiagonal();
  Mat M_inv = M.inverse();

  for (int k = 0; k < 200; ++k) {
    Vec theta(2), tau_u(2), accel_ref(2);
    theta << std::sin(0.05 * k), 0.3 * std::cos(0.07 * k);
    tau_u << 0.02 * std::sin(0.11 * k), -0.01;
    accel_ref << 0.5, -0.25 * std::sin(0.03 * k);
    ObserverOutput out = a.update(theta, tau_u, accel_ref, M, M_inv);
    Vec vel = b.velocity_step(theta, accel_ref);
    Vec tau = b.force_step(theta, tau_u, M, M_inv);
    CHECK((out.vel_hat - vel).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((out.tau_ext_hat - tau).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("general-damping path approaches the same steady state") {
  ObserverConfig cfg;
  cfg.zeta = 0.7;
  VelocityForceObserver obs(cfg, 1);
  OnePlant plant;
  Mat M = Mat::Constant(1, 1, plant.M);
  Mat M_inv = M.inverse();

  const double w = cfg.omega_c, z = cfg.zeta;
  const double wd = w * std::sqrt(1.0 - z * z);
  double worst = 0.0;
  Vec tau_hat;
  for (int k = 1; k <= 600; ++k) {
    plant.advance(0.0, 0.5, cfg.dt, 100);
    tau_hat = obs.force_step(Vec::Constant(1, plant.q), Vec::Zero(1), M, M_inv);
    double t = k * cfg.dt;
    // Step response of w^2/(s^2 + 2 z w s + w^2), underdamped branch.
    double oracle = 0.5 * (1.0 - std::exp(-z * w * t) *
                                     (std::cos(wd * t) + z * w / wd * std::sin(wd * t)));
    worst = std::max(worst, std::abs(tau_hat[0] - oracle));
  }
  CHECK(worst < 2e-3);
  CHECK(tau_hat[0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("config validation rejects broken settings") {
  ObserverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.omega_c = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.omega_c = 50.0;
  cfg.zeta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg.zeta = 1.0;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}
