#ifndef BILAT_CONTROLLER_HPP_
#define BILAT_CONTROLLER_HPP_

#include <utility>

#include "bilat/dynamics.hpp"
#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

enum class TeleopMode {
  Unilateral,
  SymmetricPosition,
  ForceFeedback,
  FourChFixedInertia,
  FourChNoCoriolis,
  FourChPseudoDiff,
  FourChProposed,
};

enum class Side { Leader, Follower };
enum class VelocitySource { Observer, PseudoDiff };

const char* teleop_mode_name(TeleopMode mode);
TeleopMode teleop_mode_from_name(const std::string& name);  // throws UsageError

/// Which terms of the control law a mode keeps active on a given side.
struct TermPattern {
  bool kp = true;
  bool kd = true;
  bool kf = true;
  bool ext_force_comp = true;   ///< the -tau_ext_hat term of tau_u
  bool coriolis_comp = true;    ///< C-part of the nonlinear compensation
  bool fixed_inertia = false;   ///< replace M~ by the configured diagonal
  VelocitySource velocity_source = VelocitySource::Observer;
};

struct ControllerConfig {
  double kp = 800.0;  ///< [1/s^2]
  double kd = 40.0;   ///< [1/s]
  TeleopMode mode = TeleopMode::FourChProposed;
  /// Constant inertia diagonal for the fixed-inertia mode [kg*m^2].
  Vec fixed_inertia_diag;
  /// Drop the off-diagonal couplings of the identified inertia inside the
  /// controller (the identified couplings are tiny in practice).
  bool diagonal_inertia = true;
  /// Extra switches ANDed with the mode pattern, for gain-zeroing studies
  /// (e.g. 4ch with the force channel and compensation turned off).
  bool enable_kf = true;
  bool enable_ext_force_comp = true;
};

/// Opposite-side state received over the bilateral channel.
struct PeerSnapshot {
  Vec theta_des;  ///< [rad]
  Vec vel_des;    ///< [rad/s]
  Vec tau_des;    ///< peer's estimated external torque [N*m]
  double timestamp = 0.0;
};

struct TickResult {
  Vec tau_ref;    ///< motor torque command, compensation included
  Vec tau_u;      ///< torque besides compensation, post limit
  Vec accel_ref;  ///< acceleration reference recomputed post limit
  Eigen::Array<bool, Eigen::Dynamic, 1> saturated;
};

/// Difference/average coordinates: x_minus = x_l - x_f, x_plus = (x_l + x_f)/2.
std::pair<Vec, Vec> transform_plus_minus(const Vec& x_l, const Vec& x_f);

/// Dual force map: tau_minus = (tau_l - tau_f)/2, tau_plus = tau_l + tau_f.
std::pair<Vec, Vec> transform_force(const Vec& tau_l, const Vec& tau_f);

/// Term-enable pattern for a teleoperation mode on one side.
TermPattern mode_gains(TeleopMode mode, Side side);

/// Fixed inertia diagonal used by the fixed-inertia comparison mode for
/// the 8-joint arm.
Vec default_fixed_inertia_diag();

/// accel_ref = Kp (theta_des - theta) + Kd (vel_des - vel_hat)
///           + Kf (tau_des + tau_ext_hat), terms masked by the pattern.
Vec acceleration_reference(const ControllerConfig& cfg, const TermPattern& pattern,
                           const PeerSnapshot& peer, const Vec& theta, const Vec& vel_hat,
                           const Vec& tau_ext_hat, const Mat& kf);

/// Per-joint clamp keeping |tau_u + h| <= tau_limit. Returns the adjusted
/// tau_u and flags the saturated joints.
Vec apply_torque_limit(const Vec& tau_u, const Vec& h, const Vec& tau_limit,
                       Eigen::Array<bool, Eigen::Dynamic, 1>* saturated = nullptr);

/// One control tick: builds the effective inertia, evaluates the gain
/// terms, compensates the nonlinear dynamics, applies the torque limit,
/// and recomputes the post-limit acceleration reference fed back to the
/// observer on the next tick.
TickResult control_tick(const ControllerConfig& cfg, const ChainModel& model, Side side,
                        const PeerSnapshot& peer, const Vec& theta, const Vec& vel_hat,
                        const Vec& tau_ext_hat);

/// Same tick with the effective inertia already built (the simulator
/// computes it once per tick for the observer and the controller).
TickResult control_tick_with_inertia(const ControllerConfig& cfg, const ChainModel& model,
                                     Side side, const PeerSnapshot& peer, const Vec& theta,
                                     const Vec& vel_hat, const Vec& tau_ext_hat, const Mat& M_eff);

/// Effective controller inertia for a mode: mass matrix (optionally
/// diagonalized) or the fixed diagonal.
Mat controller_inertia(const ControllerConfig& cfg, const TermPattern& pattern,
                       const ChainModel& model, const Vec& theta);

}  // namespace bilat

#endif  // BILAT_CONTROLLER_HPP_
