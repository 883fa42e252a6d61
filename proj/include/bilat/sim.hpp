#ifndef BILAT_SIM_HPP_
#define BILAT_SIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bilat/controller.hpp"
#include "bilat/model.hpp"
#include "bilat/telemetry.hpp"
#include "bilat/types.hpp"

namespace bilat {

/// Scripted operator hand: an impedance source tracking a target
/// trajectory, torque clamped per joint.
struct OperatorProfile {
  enum class Kind { Hold, Swing, Waypoints };
  Kind kind = Kind::Swing;

  // Swing: smoothed square wave on one joint, everything else held.
  int swing_joint = 0;           ///< 0-based
  double swing_amplitude = M_PI / 4.0;  ///< [rad]
  double swing_period = 0.8;     ///< [s] per full back-and-forth
  int swing_reps = 10;
  double swing_start = 0.5;      ///< [s]
  double swing_smooth = 0.08;    ///< transition time of each edge [s]

  // Hold: constant target.
  Vec hold_target;

  // Waypoints: piecewise-smoothstep per-joint targets.
  std::vector<double> waypoint_times;
  std::vector<Vec> waypoint_targets;

  double stiffness = 30.0;    ///< [N*m/rad]
  double damping = 1.0;       ///< [N*m*s/rad]
  double max_torque = 6.0;    ///< [N*m]
};

/// Target angle and target velocity at time t.
void operator_target(const OperatorProfile& profile, double t, int n, Vec& target, Vec& target_vel);

/// Hand torque on the leader.
Vec operator_step(const OperatorProfile& profile, double t, const Vec& q_l, const Vec& qd_l);

/// Per-joint unilateral spring-damper wall. direction +1 blocks motion
/// beyond position in +theta, -1 in -theta. Contact torque only pushes
/// away from the wall, never pulls (non-adhesive).
struct WallEnvironment {
  bool enabled = false;
  Vec position;   ///< [rad]
  Vec direction;  ///< +1 / -1 per joint; 0 disables the joint's wall
  Vec stiffness;  ///< [N*m/rad]
  Vec damping;    ///< [N*m*s/rad]
};

Vec environment_step(const WallEnvironment& env, const Vec& q_f, const Vec& qd_f);

struct Scenario {
  double duration = 10.0;  ///< [s]
  Vec start_pose;          ///< both arms start here at rest (defaults to zero)
  OperatorProfile operator_profile;
  WallEnvironment environment;
  bool encoder_quantization = false;  ///< 12-bit encoder (2*pi/4096)
  std::uint64_t seed = 0;
  double control_dt = 1e-3;
  double physics_dt = 1e-4;

  void validate(int n_joints) const;
};

Scenario load_scenario(const std::string& path, int n_joints);
void save_scenario(const Scenario& scenario, const std::string& path);

/// Built-in scenarios for the 8-joint arm: the free-air joint-1 swing
/// (10 reps of a smoothed +-45 deg square wave) and the wall-contact
/// push-and-hold session.
Scenario default_swing_scenario();
Scenario default_wall_scenario(int n_joints);

struct SessionSetup {
  const ChainModel* model_leader = nullptr;
  const ChainModel* model_follower = nullptr;
  ControllerConfig cfg_leader;
  ControllerConfig cfg_follower;
  double observer_omega_c = 50.0;
  double observer_zeta = 1.0;
};

struct SessionResult {
  TelemetryLog log;
  long missed_ticks = 0;  ///< concurrent mode only
  long total_ticks = 0;
};

/// Deterministic lockstep session: per 1 ms tick read encoders, update
/// both observers, exchange snapshots, run both controllers, then drive
/// the plant through the physics substeps. Bit-reproducible.
SessionResult run_session(const SessionSetup& setup, const Scenario& scenario);

/// Same pipeline with the leader controller, follower controller, and
/// physics running as real periodic threads exchanging latest-value
/// snapshots. Not bit-reproducible; reports missed deadlines.
SessionResult concurrent_session(const SessionSetup& setup, const Scenario& scenario);

/// 12-bit encoder quantization (4096 counts per revolution).
Vec quantize_encoder(const Vec& q);

}  // namespace bilat

#endif  // BILAT_SIM_HPP_
