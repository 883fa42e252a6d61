#include "bilat/observer.hpp"

#include <cmath>

namespace bilat {

void ObserverConfig::validate() const {
  if (!(omega_c > 0.0) || !(zeta > 0.0) || !(dt > 0.0)) {
    throw UsageError("observer needs positive omega_c, zeta, dt");
  }
  // The velocity path filters run at 2*zeta*omega_c; keep both cut-offs
  // clear of the bilinear warping regime.
  check_filter_config(omega_c, dt);
  check_filter_config(2.0 * zeta * omega_c, dt);
}

VelocityForceObserver::VelocityForceObserver(const ObserverConfig& cfg, int n_joints)
    : cfg_(cfg), n_(n_joints) {
  cfg_.validate();
  if (n_joints < 1) throw UsageError("observer needs at least one joint");
  int_hpf_state_ = Vec::Zero(n_);
  lpf_vob_state_ = Vec::Zero(n_);
  prev_accel_ref_ = Vec::Zero(n_);
  prev_theta_vel_ = Vec::Zero(n_);
  tau_u_lpf_state_ = Vec::Zero(n_);
  lpf_fob_state_ = Vec::Zero(n_);
  temp_prev_ = Vec::Zero(n_);
  temp_lpf_state_ = Vec::Zero(n_);
  prev_tau_u_ = Vec::Zero(n_);
  prev_theta_force_ = Vec::Zero(n_);
  if (cfg_.zeta != 1.0) {
    const double wc = cfg_.omega_c;
    const double a1 = 2.0 * cfg_.zeta * wc;
    const double a0 = wc * wc;
    sos_theta_ = BilinearSos(wc * wc, 0.0, 0.0, a1, a0, cfg_.dt, n_);
    sos_input_ = BilinearSos(0.0, 0.0, wc * wc, a1, a0, cfg_.dt, n_);
  }
}

Vec VelocityForceObserver::velocity_step(const Vec& theta, const Vec& accel_ref) {
  if (theta.size() != n_ || accel_ref.size() != n_) {
    throw UsageError("observer joint vector length mismatch");
  }
  if (!theta.allFinite() || !accel_ref.allFinite()) {
    throw DomainFault("non-finite observer input");
  }
  const double w2 = 2.0 * cfg_.zeta * cfg_.omega_c;
  int_hpf_state_ = integ_hpf_step(int_hpf_state_, accel_ref, prev_accel_ref_, w2, cfg_.dt);
  lpf_vob_state_ = lpf1_step(lpf_vob_state_, theta, prev_theta_vel_, w2, cfg_.dt);
  prev_accel_ref_ = accel_ref;
  prev_theta_vel_ = theta;
  return int_hpf_state_ + w2 * (theta - lpf_vob_state_);
}

Vec VelocityForceObserver::force_step(const Vec& theta, const Vec& tau_u, const Mat& M,
                                      const Mat& M_inv) {
  if (theta.size() != n_ || tau_u.size() != n_) {
    throw UsageError("observer joint vector length mismatch");
  }
  if (!theta.allFinite() || !tau_u.allFinite()) {
    throw DomainFault("non-finite observer input");
  }
  const double wc = cfg_.omega_c;
  Vec tau_ext_hat(n_);
  if (cfg_.zeta == 1.0) {
    // The inertia is frozen within the tick: the current M^{-1} scales
    // both the current and the previous input torque.
    tau_u_lpf_state_ =
        lpf1_step(tau_u_lpf_state_, M_inv * tau_u, M_inv * prev_tau_u_, wc, cfg_.dt);
    lpf_fob_state_ = lpf1_step(lpf_fob_state_, theta, prev_theta_force_, wc, cfg_.dt);
    const Vec pdiff_fob = wc * (theta - lpf_fob_state_);
    const Vec temp = tau_u_lpf_state_ + wc * pdiff_fob;
    temp_lpf_state_ = lpf1_step(temp_lpf_state_, temp, temp_prev_, wc, cfg_.dt);
    temp_prev_ = temp;
    tau_ext_hat = M * (-temp_lpf_state_ + wc * pdiff_fob);
  } else {
    const Vec y_theta = sos_theta_.step(theta);
    const Vec y_input = sos_input_.step(M_inv * tau_u);
    tau_ext_hat = M * (y_theta - y_input);
  }
  prev_tau_u_ = tau_u;
  prev_theta_force_ = theta;
  return tau_ext_hat;
}

ObserverOutput VelocityForceObserver::update(const Vec& theta, const Vec& tau_u,
                                             const Vec& accel_ref, const Mat& M,
                                             const Mat& M_inv) {
  ObserverOutput out;
  out.vel_hat = velocity_step(theta, accel_ref);
  out.tau_ext_hat = force_step(theta, tau_u, M, M_inv);
  return out;
}

}  // namespace bilat
