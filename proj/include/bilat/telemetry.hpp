#ifndef BILAT_TELEMETRY_HPP_
#define BILAT_TELEMETRY_HPP_

#include <string>
#include <vector>

#include "bilat/model.hpp"
#include "bilat/types.hpp"

namespace bilat {

/// Per-arm signals of one control tick.
struct ArmSample {
  Vec q;            ///< joint angle [rad] (true)
  Vec qd;           ///< joint velocity [rad/s] (true)
  Vec qd_hat;       ///< observer velocity estimate [rad/s]
  Vec tau_ref;      ///< commanded motor torque [N*m]
  Vec tau_u;        ///< torque besides compensation [N*m]
  Vec tau_ext;      ///< true external torque [N*m]
  Vec tau_ext_hat;  ///< estimated external torque [N*m]
  Eigen::Array<bool, Eigen::Dynamic, 1> saturated;
};

struct LogRow {
  double t = 0.0;
  ArmSample leader;
  ArmSample follower;
};

/// Fixed-rate record of a teleoperation session (1 kHz rows).
struct TelemetryLog {
  int n_joints = 0;
  double dt = 1e-3;
  std::vector<LogRow> rows;

  void validate() const;  // finite, complete, evenly spaced
};

/// CSV with header t, l_q1.., l_qd1.., l_qdhat1.., l_tau_ref1.., l_tau_u1..,
/// l_tau_ext1.., l_tau_exthat1.., l_sat1.., then the same f_ block.
void write_telemetry_csv(const TelemetryLog& log, const std::string& path);
TelemetryLog read_telemetry_csv(const std::string& path);

/// Tracking and estimation quality metrics of one session.
struct SessionMetrics {
  double angle_mae_deg = 0.0;       ///< mean |q_l - q_f| over ticks and joints
  double velocity_mae_deg_s = 0.0;  ///< on true velocities
  double torque_mae_nm = 0.0;       ///< mean |tau_ext_hat_l + tau_ext_hat_f|
  double obs_vel_rms_leader_deg_s = 0.0;
  double obs_vel_rms_follower_deg_s = 0.0;
  long saturation_count_leader = 0;
  long saturation_count_follower = 0;
};

/// The torque column follows the leader-sign-reversal convention: the
/// error is |tau_ext_hat_l - (-tau_ext_hat_f)|.
SessionMetrics compute_mae(const TelemetryLog& log);

}  // namespace bilat

#endif  // BILAT_TELEMETRY_HPP_
