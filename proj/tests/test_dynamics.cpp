#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bilat/dynamics.hpp"
#include "bilat/model.hpp"
#include "test_helpers.hpp"

using namespace bilat;

namespace {

Vec random_vec(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("inverse dynamics of the default model matches frozen oracle") {
  ChainModel m = load_chain_model(bilat_test::model_path());
  Vec q(8), qd(8), qdd(8);
  q << 0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7, -0.8;
  qd << 0.5, -0.4, 0.3, -0.2, 0.1, 0.2, -0.3, 0.4;
  qdd << 1.0, -1.0, 0.5, -0.5, 0.25, -0.25, 0.125, -0.125;
  Vec tau = inverse_dynamics(m, q, qd, qdd);
  // [DERIVED: frozen from the recursive Newton-Euler implementation at the
  // state above; guards against regressions in the recursion]
  Vec expect(8);
  expect << 0.07000078806326604, 0.81468583630939473, 0.046944287415601325, 0.57581216313605299,
      0.019612448185509061, 0.067556479303242101, -0.010523434544640282, 0.0115;
  for (int i = 0; i < 8; ++i) CHECK(tau[i] == doctest::Approx(expect[i]).epsilon(1e-12));

  // Gravity-only slice of the same state.
  Vec g = gravity_torque(m, q);
  CHECK(g[0] == doctest::Approx(0.0).scale(1.0));  // joint 1 spins about gravity
  CHECK(g[1] == doctest::Approx(0.99458022881057973).epsilon(1e-12));
  CHECK(g[7] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("mass matrix at home matches frozen diagonal and is SPD") {
  ChainModel m = load_chain_model(bilat_test::model_path());
  Mat M = mass_matrix(m, Vec::Zero(8));
  Vec diag_expect(8);
  // [DERIVED: frozen]
  diag_expect << 0.0092049, 0.15971884, 0.0068659, 0.03593484, 0.0046899, 0.00671049, 0.0043852,
      0.004;
  for (int i = 0; i < 8; ++i) CHECK(M(i, i) == doctest::Approx(diag_expect[i]).epsilon(1e-10));

  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("regressor times phi equals inverse dynamics") {
  ChainModel m = bilat_test::make_test_chain(3);
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Vec q = random_vec(rng, 3, M_PI);
    Vec qd = random_vec(rng, 3, 3.0);
    Vec qdd = random_vec(rng, 3, 10.0);
    Vec tau = inverse_dynamics(m, q, qd, qdd);
    Mat Y = regressor(m, q, qd, qdd);
    REQUIRE(Y.rows() == 3);
    REQUIRE(Y.cols() == m.phi.size());
    double rel = (Y * m.phi.values - tau).norm() / (tau.norm() + 1e-12);
    CHECK(rel < 1e-9);
  }
}

TEST_CASE("dynamics decompose as M qdd + bias") {
  ChainModel m = bilat_test::make_test_chain(4);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Vec q = random_vec(rng, 4, M_PI);
    Vec qd = random_vec(rng, 4, 2.0);
    Vec qdd = random_vec(rng, 4, 5.0);
    Vec lhs = inverse_dynamics(m, q, qd, qdd);
    Vec rhs = mass_matrix(m, q) * qdd + bias_forces(m, q, qd);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("bias splits into Coriolis, friction, and gravity") {
  ChainModel m = bilat_test::make_test_chain(3);
  std::mt19937_64 rng(11);
  Vec fv = m.friction_diag();
  for (int trial = 0; trial < 20; ++trial) {
    Vec q = random_vec(rng, 3, 1.5);
    Vec qd = random_vec(rng, 3, 2.0);
    Vec lhs = bias_forces(m, q, qd);
    Vec rhs = coriolis_matrix(m, q, qd) * qd + fv.asDiagonal() * qd + gravity_torque(m, q);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-6);  // C from finite differences
  }
}

TEST_CASE("Mdot - 2C is skew symmetric") {
  ChainModel m = bilat_test::make_test_chain(3);
  std::mt19937_64 rng(13);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    Vec q = random_vec(rng, 3, 1.5);
    Vec qd = random_vec(rng, 3, 2.0);
    Vec x = random_vec(rng, 3, 1.0);
    Mat Mp = mass_matrix(m, q + h * qd);
    Mat Mm = mass_matrix(m, q - h * qd);
    Mat Mdot = (Mp - Mm) / (2.0 * h);
    Mat C = coriolis_matrix(m, q, qd);
    CHECK(std::abs(x.dot((Mdot - 2.0 * C) * x)) < 1e-7 * (1.0 + x.squaredNorm()));
  }
}

TEST_CASE("forward dynamics inverts inverse dynamics") {
  ChainModel m = bilat_test::make_test_chain(4);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Vec q = random_vec(rng, 4, M_PI);
    Vec qd = random_vec(rng, 4, 2.0);
    Vec qdd = random_vec(rng, 4, 5.0);
    Vec tau = inverse_dynamics(m, q, qd, qdd);
    Vec qdd_back = forward_dynamics(m, q, qd, tau);
    CHECK((qdd_back - qdd).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("forward dynamics raises a domain fault on singular inertia") {
  ChainModel m = bilat_test::make_test_chain(2);
  m.phi.values.setZero();  // massless chain
  CHECK_THROWS_AS(forward_dynamics(m, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)), DomainFault);
}

namespace {

/// Point-mass pendulum (m = 0.8 kg, l = 0.3 m) swinging in the gravity
/// plane: the joint axis is world z, so gravity is tipped onto x.
bilat::ChainModel make_pendulum() {
  bilat::ChainModel m;
  m.n_joints = 1;
  m.frames.resize(1);
  m.gravity = Vec3(-9.80665, 0.0, 0.0);
  m.torque_limit = Vec::Constant(1, 50.0);
  m.phi.names = {"M1", "MX1", "ZZ1", "IA1"};
  m.phi.values = Vec(4);
  m.phi.values << 0.8, 0.8 * 0.3, 0.8 * 0.3 * 0.3, 0.002;
  m.validate();
  return m;
}

/// Potential with dU/dq = gravity_torque, by Gauss-Legendre quadrature
/// from q = 0. Exact to machine precision for the smooth 1-DOF torque.
double pendulum_potential(const ChainModel& m, double q) {
  static const double xs[] = {-0.9739065285, -0.8650633667, -0.6794095683, -0.4333953941,
                              -0.1488743390, 0.1488743390,  0.4333953941,  0.6794095683,
                              0.8650633667,  0.9739065285};
  static const double ws[] = {0.0666713443, 0.1494513492, 0.2190863625, 0.2692667193,
                              0.2955242247, 0.2955242247, 0.2692667193, 0.2190863625,
                              0.1494513492, 0.0666713443};
  double u = 0.0;
  for (int i = 0; i < 10; ++i) {
    double s = 0.5 * q * (1.0 + xs[i]);
    u += 0.5 * q * ws[i] * gravity_torque(m, Vec::Constant(1, s))[0];
  }
  return u;
}

}  // namespace

TEST_CASE("unforced frictionless pendulum conserves energy over 10 s") {
  ChainModel m = make_pendulum();
  Vec q = Vec::Constant(1, 1.0);  // released from rest, 1 rad off the datum
  Vec qd = Vec::Zero(1);
  const double dt = 1e-4;
  const int steps = 100000;  // 10 s

  // Energy above the bottom of the potential well.
  double u_min = 0.0;
  for (double s = -M_PI; s <= M_PI; s += 0.01) {
    u_min = std::min(u_min, pendulum_potential(m, s));
  }
  double e0 = pendulum_potential(m, q[0]) - u_min;
  REQUIRE(e0 > 0.1);  // the release pose actually stores energy

  double worst = 0.0;
  for (int k = 0; k < steps; ++k) {
    auto [q1, qd1] = integrate_step(m, q, qd, Vec::Zero(1), dt);
    q = q1;
    qd = qd1;
    if (k % 10 != 9) continue;
    double e = 0.5 * qd.dot(mass_matrix(m, q) * qd) + pendulum_potential(m, q[0]) - u_min;
    worst = std::max(worst, std::abs(e - e0));
  }
  CHECK(worst < 0.001 * e0);  // drift under 0.1 % of the stored energy
}

TEST_CASE("semi-implicit Euler tracks a fine RK4 oracle") {
  ChainModel m = bilat_test::make_test_chain(2, /*with_friction=*/false);
  Vec q(2), qd(2);
  q << 0.5, -0.2;
  qd << 0.0, 0.3;
  Vec q_rk = q, qd_rk = qd;

  const double dt = 1e-5;
  const int steps = 50000;  // 0.5 s
  auto accel = [&](const Vec& qq, const Vec& vv) { return forward_dynamics(m, qq, vv, Vec::Zero(2)); };
  for (int k = 0; k < steps; ++k) {
    auto [q1, qd1] = integrate_step(m, q, qd, Vec::Zero(2), dt);
    q = q1;
    qd = qd1;

    Vec k1q = qd_rk, k1v = accel(q_rk, qd_rk);
    Vec k2q = qd_rk + 0.5 * dt * k1v, k2v = accel(q_rk + 0.5 * dt * k1q, qd_rk + 0.5 * dt * k1v);
    Vec k3q = qd_rk + 0.5 * dt * k2v, k3v = accel(q_rk + 0.5 * dt * k2q, qd_rk + 0.5 * dt * k2v);
    Vec k4q = qd_rk + dt * k3v, k4v = accel(q_rk + dt * k3q, qd_rk + dt * k3v);
    q_rk += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    qd_rk += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  CHECK((q - q_rk).cwiseAbs().maxCoeff() < 1e-3);
  CHECK((qd - qd_rk).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("inverse_dynamics_with_params is linear in the parameters") {
  ChainModel m = bilat_test::make_test_chain(3);
  std::mt19937_64 rng(23);
  Vec q = random_vec(rng, 3, 1.0);
  Vec qd = random_vec(rng, 3, 1.0);
  Vec qdd = random_vec(rng, 3, 1.0);

  Vec phi_a = m.phi.values;
  Vec phi_b = random_vec(rng, m.phi.size(), 0.05);
  Vec ta = inverse_dynamics_with_params(m, m.assemble_links(phi_a), q, qd, qdd);
  Vec tb = inverse_dynamics_with_params(m, m.assemble_links(phi_b), q, qd, qdd);
  Vec tsum = inverse_dynamics_with_params(m, m.assemble_links(phi_a + phi_b), q, qd, qdd);
  CHECK((tsum - ta - tb).cwiseAbs().maxCoeff() < 1e-10);
}
