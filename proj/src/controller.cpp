#include "bilat/controller.hpp"

#include <cmath>

namespace bilat {

const char* teleop_mode_name(TeleopMode mode) {
  switch (mode) {
    case TeleopMode::Unilateral: return "unilateral";
    case TeleopMode::SymmetricPosition: return "symmetric-position";
    case TeleopMode::ForceFeedback: return "force-feedback";
    case TeleopMode::FourChFixedInertia: return "4ch-fixed-inertia";
    case TeleopMode::FourChNoCoriolis: return "4ch-no-coriolis";
    case TeleopMode::FourChPseudoDiff: return "4ch-pseudo-diff";
    case TeleopMode::FourChProposed: return "4ch-proposed";
  }
  return "?";
}

TeleopMode teleop_mode_from_name(const std::string& name) {
  for (TeleopMode mode :
       {TeleopMode::Unilateral, TeleopMode::SymmetricPosition, TeleopMode::ForceFeedback,
        TeleopMode::FourChFixedInertia, TeleopMode::FourChNoCoriolis, TeleopMode::FourChPseudoDiff,
        TeleopMode::FourChProposed}) {
    if (name == teleop_mode_name(mode)) return mode;
  }
  throw UsageError("unknown teleoperation mode: '" + name + "'");
}

std::pair<Vec, Vec> transform_plus_minus(const Vec& x_l, const Vec& x_f) {
  if (x_l.size() != x_f.size()) throw UsageError("transform_plus_minus length mismatch");
  return {x_l - x_f, 0.5 * (x_l + x_f)};
}

std::pair<Vec, Vec> transform_force(const Vec& tau_l, const Vec& tau_f) {
  if (tau_l.size() != tau_f.size()) throw UsageError("transform_force length mismatch");
  return {0.5 * (tau_l - tau_f), tau_l + tau_f};
}

TermPattern mode_gains(TeleopMode mode, Side side) {
  TermPattern p;
  switch (mode) {
    case TeleopMode::Unilateral:
      if (side == Side::Leader) p.kp = p.kd = false;
      p.kf = false;
      p.ext_force_comp = false;
      break;
    case TeleopMode::SymmetricPosition:
      p.kf = false;
      p.ext_force_comp = false;
      break;
    case TeleopMode::ForceFeedback:
      if (side == Side::Leader) {
        p.kp = p.kd = false;
      } else {
        p.kf = false;
        p.ext_force_comp = false;
      }
      break;
    case TeleopMode::FourChFixedInertia:
      p.fixed_inertia = true;
      break;
    case TeleopMode::FourChNoCoriolis:
      p.coriolis_comp = false;
      break;
    case TeleopMode::FourChPseudoDiff:
      p.velocity_source = VelocitySource::PseudoDiff;
      break;
    case TeleopMode::FourChProposed:
      break;
  }
  return p;
}

Vec default_fixed_inertia_diag() {
  Vec d(8);
  d << 0.012258, 0.112990, 0.012028, 0.040000, 0.005676, 0.006600, 0.006281, 0.006891;
  return d;
}

Mat controller_inertia(const ControllerConfig& cfg, const TermPattern& pattern,
                       const ChainModel& model, const Vec& theta) {
  if (pattern.fixed_inertia) {
    Vec diag = cfg.fixed_inertia_diag.size() > 0 ? cfg.fixed_inertia_diag
                                                 : default_fixed_inertia_diag();
    if (diag.size() != model.n_joints) {
      throw UsageError("fixed_inertia_diag length does not match chain");
    }
    if ((diag.array() <= 0.0).any()) throw UsageError("fixed_inertia_diag must be positive");
    return diag.asDiagonal();
  }
  Mat M = mass_matrix(model, theta);
  if (cfg.diagonal_inertia) {
    return M.diagonal().asDiagonal();
  }
  return M;
}

Vec acceleration_reference(const ControllerConfig& cfg, const TermPattern& pattern,
                           const PeerSnapshot& peer, const Vec& theta, const Vec& vel_hat,
                           const Vec& tau_ext_hat, const Mat& kf) {
  const int n = static_cast<int>(theta.size());
  if (peer.theta_des.size() != n || peer.vel_des.size() != n || peer.tau_des.size() != n ||
      vel_hat.size() != n || tau_ext_hat.size() != n) {
    throw UsageError("acceleration_reference length mismatch");
  }
  Vec accel_ref = Vec::Zero(n);
  if (pattern.kp) accel_ref += cfg.kp * (peer.theta_des - theta);
  if (pattern.kd) accel_ref += cfg.kd * (peer.vel_des - vel_hat);
  if (pattern.kf) accel_ref += kf * (peer.tau_des + tau_ext_hat);
  return accel_ref;
}

Vec apply_torque_limit(const Vec& tau_u, const Vec& h, const Vec& tau_limit,
                       Eigen::Array<bool, Eigen::Dynamic, 1>* saturated) {
  const int n = static_cast<int>(tau_u.size());
  if (h.size() != n || tau_limit.size() != n) throw UsageError("apply_torque_limit length mismatch");
  Vec out = tau_u;
  if (saturated) saturated->setConstant(n, false);
  for (int i = 0; i < n; ++i) {
    if (tau_u[i] + h[i] > tau_limit[i]) {
      out[i] = tau_limit[i] - h[i];
      if (saturated) (*saturated)[i] = true;
    } else if (tau_u[i] + h[i] < -tau_limit[i]) {
      out[i] = -tau_limit[i] - h[i];
      if (saturated) (*saturated)[i] = true;
    }
  }
  return out;
}

TickResult control_tick(const ControllerConfig& cfg, const ChainModel& model, Side side,
                        const PeerSnapshot& peer, const Vec& theta, const Vec& vel_hat,
                        const Vec& tau_ext_hat) {
  const TermPattern pattern = mode_gains(cfg.mode, side);
  const Mat M = controller_inertia(cfg, pattern, model, theta);
  return control_tick_with_inertia(cfg, model, side, peer, theta, vel_hat, tau_ext_hat, M);
}

TickResult control_tick_with_inertia(const ControllerConfig& cfg, const ChainModel& model,
                                     Side side, const PeerSnapshot& peer, const Vec& theta,
                                     const Vec& vel_hat, const Vec& tau_ext_hat, const Mat& M) {
  if (!theta.allFinite() || !vel_hat.allFinite() || !tau_ext_hat.allFinite() ||
      !peer.theta_des.allFinite() || !peer.vel_des.allFinite() || !peer.tau_des.allFinite()) {
    throw DomainFault("non-finite controller input");
  }
  TermPattern pattern = mode_gains(cfg.mode, side);
  pattern.kf = pattern.kf && cfg.enable_kf;
  pattern.ext_force_comp = pattern.ext_force_comp && cfg.enable_ext_force_comp;
  const Mat kf = 0.5 * M.inverse();

  const Vec accel_cmd =
      acceleration_reference(cfg, pattern, peer, theta, vel_hat, tau_ext_hat, kf);

  Vec tau_u = M * accel_cmd;
  if (pattern.ext_force_comp) tau_u -= tau_ext_hat;

  // Nonlinear compensation; the Coriolis/centrifugal part can be dropped
  // while friction and gravity stay on.
  Vec h;
  if (pattern.coriolis_comp) {
    h = bias_forces(model, theta, vel_hat);
  } else {
    h = gravity_torque(model, theta) + model.friction_diag().cwiseProduct(vel_hat);
  }

  TickResult result;
  result.tau_u = apply_torque_limit(tau_u, h, model.torque_limit, &result.saturated);
  result.tau_ref = result.tau_u + h;
  result.accel_ref = M.llt().solve(result.tau_u + tau_ext_hat);
  return result;
}

}  // namespace bilat
