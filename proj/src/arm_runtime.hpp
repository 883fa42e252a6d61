#ifndef BILAT_SRC_ARM_RUNTIME_HPP_
#define BILAT_SRC_ARM_RUNTIME_HPP_

// Internal: per-arm state shared by the lockstep and concurrent session
// drivers. Not part of the public headers.

#include <optional>

#include "bilat/controller.hpp"
#include "bilat/filters.hpp"
#include "bilat/model.hpp"
#include "bilat/observer.hpp"
#include "bilat/telemetry.hpp"
#include "bilat/types.hpp"

namespace bilat::detail {

struct ArmRuntime {
  ArmRuntime(const ChainModel& model_in, const ControllerConfig& cfg_in, Side side_in,
             const ObserverConfig& obs_cfg, const Vec& start_pose);

  /// Read encoders, build the effective inertia, run the observer.
  void sense_and_estimate(bool quantize);

  /// What the peer arm sees over the channel.
  PeerSnapshot snapshot(double t) const;

  /// Run the control law against the peer snapshot; stores the commands.
  void control(const PeerSnapshot& peer);

  /// Telemetry view of the current tick.
  ArmSample sample() const;

  const ChainModel* model;
  ControllerConfig cfg;
  Side side;
  TermPattern pattern;
  VelocityForceObserver obs;
  std::optional<PseudoDiff> pdiff;  ///< engaged for the pseudo-diff mode

  // Plant state (owned by the physics loop).
  Vec q, qd;
  Vec tau_ext_true;

  // Latest controller outputs, zero-order held between ticks.
  Vec tau_u_cmd, accel_ref_cmd, tau_ref_cmd;
  Eigen::Array<bool, Eigen::Dynamic, 1> saturated;

  // Latest estimates.
  Vec vel_hat, tau_ext_hat, theta_meas;
  Mat M_eff, M_eff_inv;
};

}  // namespace bilat::detail

#endif  // BILAT_SRC_ARM_RUNTIME_HPP_
