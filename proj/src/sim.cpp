#include "bilat/sim.hpp"

#include <cmath>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "bilat/filters.hpp"
#include "bilat/observer.hpp"
#include "arm_runtime.hpp"

namespace bilat {

using json = nlohmann::ordered_json;

namespace {

// C1 transition from 0 to 1 over [0, 1].
inline double smoothstep(double x) { return x * x * (3.0 - 2.0 * x); }
inline double smoothstep_deriv(double x) { return 6.0 * x * (1.0 - x); }

// Piecewise-constant level sequence with smoothstep edges.
struct Edge {
  double time;
  double level;  // level after this edge
};

void eval_edges(const std::vector<Edge>& edges, double initial_level, double smooth, double t,
                double& y, double& yd) {
  y = initial_level;
  yd = 0.0;
  double prev = initial_level;
  for (const Edge& e : edges) {
    if (t <= e.time) break;
    if (t >= e.time + smooth) {
      y = e.level;
      yd = 0.0;
    } else {
      const double x = (t - e.time) / smooth;
      y = prev + (e.level - prev) * smoothstep(x);
      yd = (e.level - prev) * smoothstep_deriv(x) / smooth;
    }
    prev = e.level;
  }
}

std::vector<Edge> swing_edges(const OperatorProfile& p) {
  std::vector<Edge> edges;
  const double half = p.swing_period / 2.0;
  for (int k = 0; k < 2 * p.swing_reps; ++k) {
    edges.push_back({p.swing_start + k * half, (k % 2 == 0) ? p.swing_amplitude
                                                            : -p.swing_amplitude});
  }
  edges.push_back({p.swing_start + 2 * p.swing_reps * half, 0.0});
  return edges;
}

}  // namespace

void operator_target(const OperatorProfile& profile, double t, int n, Vec& target,
                     Vec& target_vel) {
  target = Vec::Zero(n);
  target_vel = Vec::Zero(n);
  switch (profile.kind) {
    case OperatorProfile::Kind::Hold:
      if (profile.hold_target.size() > 0) {
        if (profile.hold_target.size() != n) throw UsageError("hold_target length mismatch");
        target = profile.hold_target;
      }
      break;
    case OperatorProfile::Kind::Swing: {
      if (profile.swing_joint < 0 || profile.swing_joint >= n) {
        throw UsageError("swing_joint out of range");
      }
      double y, yd;
      eval_edges(swing_edges(profile), 0.0, profile.swing_smooth, t, y, yd);
      target[profile.swing_joint] = y;
      target_vel[profile.swing_joint] = yd;
      break;
    }
    case OperatorProfile::Kind::Waypoints: {
      const auto& times = profile.waypoint_times;
      const auto& targets = profile.waypoint_targets;
      if (times.empty() || times.size() != targets.size()) {
        throw UsageError("waypoint times/targets mismatch");
      }
      for (const Vec& w : targets) {
        if (w.size() != n) throw UsageError("waypoint target length mismatch");
      }
      if (t <= times.front()) {
        target = targets.front();
        break;
      }
      if (t >= times.back()) {
        target = targets.back();
        break;
      }
      std::size_t i = 1;
      while (times[i] < t) ++i;
      const double span = times[i] - times[i - 1];
      const double x = (t - times[i - 1]) / span;
      target = targets[i - 1] + (targets[i] - targets[i - 1]) * smoothstep(x);
      target_vel = (targets[i] - targets[i - 1]) * (smoothstep_deriv(x) / span);
      break;
    }
  }
}

Vec operator_step(const OperatorProfile& profile, double t, const Vec& q_l, const Vec& qd_l) {
  const int n = static_cast<int>(q_l.size());
  Vec target, target_vel;
  operator_target(profile, t, n, target, target_vel);
  Vec tau = profile.stiffness * (target - q_l) + profile.damping * (target_vel - qd_l);
  return tau.cwiseMax(-profile.max_torque).cwiseMin(profile.max_torque);
}

Vec environment_step(const WallEnvironment& env, const Vec& q_f, const Vec& qd_f) {
  const int n = static_cast<int>(q_f.size());
  Vec tau = Vec::Zero(n);
  if (!env.enabled) return tau;
  if (env.position.size() != n || env.direction.size() != n || env.stiffness.size() != n ||
      env.damping.size() != n) {
    throw UsageError("wall environment length mismatch");
  }
  for (int i = 0; i < n; ++i) {
    const double s = env.direction[i];
    if (s == 0.0) continue;
    const double pen = s * (q_f[i] - env.position[i]);
    if (pen <= 0.0) continue;
    double f = -env.stiffness[i] * pen - env.damping[i] * (s * qd_f[i]);
    if (f > 0.0) f = 0.0;  // never pull toward the wall
    tau[i] = s * f;
  }
  return tau;
}

Vec quantize_encoder(const Vec& q) {
  const double step = 2.0 * M_PI / 4096.0;
  return (q / step).array().round().matrix() * step;
}

void Scenario::validate(int n_joints) const {
  if (!(duration > 0.0)) throw UsageError("scenario duration must be positive");
  if (start_pose.size() != 0 && start_pose.size() != n_joints) {
    throw UsageError("start_pose length mismatch");
  }
  if (!(control_dt > 0.0) || !(physics_dt > 0.0)) throw UsageError("bad scenario time steps");
  const double ratio = control_dt / physics_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw UsageError("control_dt must be an integer multiple of physics_dt");
  }
  if (operator_profile.stiffness < 0.0 || operator_profile.damping < 0.0 ||
      operator_profile.max_torque < 0.0) {
    throw UsageError("operator impedance must be non-negative");
  }
}

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr.at(i).get<double>();
  return v;
}

}  // namespace

Scenario load_scenario(const std::string& path, int n_joints) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open scenario file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw UsageError("scenario file " + path + ": " + e.what());
  }
  Scenario s;
  try {
    s.duration = doc.at("duration").get<double>();
    if (doc.contains("start_pose")) s.start_pose = vec_from_json(doc["start_pose"]);
    s.encoder_quantization = doc.value("encoder_quantization", false);
    s.seed = doc.value("seed", 0ULL);
    s.control_dt = doc.value("control_dt", 1e-3);
    s.physics_dt = doc.value("physics_dt", 1e-4);

    const json& op = doc.at("operator");
    OperatorProfile& p = s.operator_profile;
    const std::string kind = op.value("kind", "swing");
    if (kind == "hold") {
      p.kind = OperatorProfile::Kind::Hold;
      if (op.contains("target")) p.hold_target = vec_from_json(op["target"]);
    } else if (kind == "swing") {
      p.kind = OperatorProfile::Kind::Swing;
      p.swing_joint = op.value("joint", 0);
      p.swing_amplitude = op.value("amplitude", M_PI / 4.0);
      p.swing_period = op.value("period", 0.8);
      p.swing_reps = op.value("reps", 10);
      p.swing_start = op.value("start", 0.5);
      p.swing_smooth = op.value("smooth", 0.08);
    } else if (kind == "waypoints") {
      p.kind = OperatorProfile::Kind::Waypoints;
      for (const auto& w : op.at("waypoints")) {
        p.waypoint_times.push_back(w.at("t").get<double>());
        p.waypoint_targets.push_back(vec_from_json(w.at("target")));
      }
    } else {
      throw UsageError("unknown operator kind: " + kind);
    }
    p.stiffness = op.value("stiffness", 30.0);
    p.damping = op.value("damping", 1.0);
    p.max_torque = op.value("max_torque", 6.0);

    if (doc.contains("environment")) {
      const json& env = doc["environment"];
      s.environment.enabled = env.value("enabled", true);
      s.environment.position = vec_from_json(env.at("position"));
      s.environment.direction = vec_from_json(env.at("direction"));
      s.environment.stiffness = vec_from_json(env.at("stiffness"));
      s.environment.damping = vec_from_json(env.at("damping"));
    }
  } catch (const json::exception& e) {
    throw UsageError("scenario file " + path + ": " + e.what());
  }
  s.validate(n_joints);
  return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
  json doc;
  doc["duration"] = s.duration;
  if (s.start_pose.size() > 0) doc["start_pose"] = vec_to_json(s.start_pose);
  doc["encoder_quantization"] = s.encoder_quantization;
  doc["seed"] = s.seed;
  doc["control_dt"] = s.control_dt;
  doc["physics_dt"] = s.physics_dt;
  json op;
  const OperatorProfile& p = s.operator_profile;
  switch (p.kind) {
    case OperatorProfile::Kind::Hold:
      op["kind"] = "hold";
      if (p.hold_target.size() > 0) op["target"] = vec_to_json(p.hold_target);
      break;
    case OperatorProfile::Kind::Swing:
      op["kind"] = "swing";
      op["joint"] = p.swing_joint;
      op["amplitude"] = p.swing_amplitude;
      op["period"] = p.swing_period;
      op["reps"] = p.swing_reps;
      op["start"] = p.swing_start;
      op["smooth"] = p.swing_smooth;
      break;
    case OperatorProfile::Kind::Waypoints: {
      op["kind"] = "waypoints";
      json ws = json::array();
      for (std::size_t i = 0; i < p.waypoint_times.size(); ++i) {
        ws.push_back({{"t", p.waypoint_times[i]}, {"target", vec_to_json(p.waypoint_targets[i])}});
      }
      op["waypoints"] = ws;
      break;
    }
  }
  op["stiffness"] = p.stiffness;
  op["damping"] = p.damping;
  op["max_torque"] = p.max_torque;
  doc["operator"] = op;
  if (s.environment.enabled) {
    doc["environment"] = {{"enabled", true},
                          {"position", vec_to_json(s.environment.position)},
                          {"direction", vec_to_json(s.environment.direction)},
                          {"stiffness", vec_to_json(s.environment.stiffness)},
                          {"damping", vec_to_json(s.environment.damping)}};
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write scenario file: " + path);
  out << doc.dump(2) << "\n";
}

Scenario default_swing_scenario() {
  Scenario s;
  s.duration = 9.3;
  OperatorProfile& p = s.operator_profile;
  p.kind = OperatorProfile::Kind::Swing;
  p.swing_joint = 1;
  p.swing_amplitude = 0.25;
  p.swing_period = 0.3;
  p.swing_reps = 26;
  p.swing_start = 0.5;
  p.swing_smooth = 0.03;
  p.stiffness = 5.0;
  p.damping = 0.1;
  p.max_torque = 2.5;
  return s;
}

Scenario default_wall_scenario(int n_joints) {
  Scenario s;
  s.duration = 6.0;
  OperatorProfile& p = s.operator_profile;
  p.kind = OperatorProfile::Kind::Waypoints;
  p.waypoint_times = {0.5, 2.0};
  p.waypoint_targets = {Vec::Zero(n_joints), Vec::Zero(n_joints)};
  p.waypoint_targets[1][0] = 0.7;  // push past the wall and lean on it
  p.stiffness = 30.0;
  p.damping = 1.0;
  p.max_torque = 6.0;
  WallEnvironment& e = s.environment;
  e.enabled = true;
  e.position = Vec::Zero(n_joints);
  e.position[0] = 0.35;
  e.direction = Vec::Zero(n_joints);
  e.direction[0] = 1.0;
  e.stiffness = Vec::Zero(n_joints);
  e.stiffness[0] = 200.0;
  e.damping = Vec::Zero(n_joints);
  e.damping[0] = 2.0;
  return s;
}

// ---------------------------------------------------------------------------
// Lockstep session
// ---------------------------------------------------------------------------

namespace detail {

ArmRuntime::ArmRuntime(const ChainModel& model_in, const ControllerConfig& cfg_in, Side side_in,
                       const ObserverConfig& obs_cfg, const Vec& start_pose)
    : model(&model_in),
      cfg(cfg_in),
      side(side_in),
      pattern(mode_gains(cfg_in.mode, side_in)),
      obs(obs_cfg, model_in.n_joints) {
  const int n = model_in.n_joints;
  q = start_pose;
  qd = Vec::Zero(n);
  tau_u_cmd = Vec::Zero(n);
  accel_ref_cmd = Vec::Zero(n);
  tau_ref_cmd = Vec::Zero(n);
  tau_ext_true = Vec::Zero(n);
  vel_hat = Vec::Zero(n);
  tau_ext_hat = Vec::Zero(n);
  theta_meas = start_pose;
  saturated.setConstant(n, false);
  if (pattern.velocity_source == VelocitySource::PseudoDiff) {
    pdiff.emplace(obs_cfg.omega_c, obs_cfg.dt, n);
  }
}

void ArmRuntime::sense_and_estimate(bool quantize) {
  theta_meas = quantize ? quantize_encoder(q) : q;
  M_eff = controller_inertia(cfg, pattern, *model, theta_meas);
  M_eff_inv = M_eff.inverse();
  if (pdiff) {
    vel_hat = pdiff->step(theta_meas);
    obs.velocity_step(theta_meas, accel_ref_cmd);  // keep internal states ticking
  } else {
    vel_hat = obs.velocity_step(theta_meas, accel_ref_cmd);
  }
  tau_ext_hat = obs.force_step(theta_meas, tau_u_cmd, M_eff, M_eff_inv);
}

PeerSnapshot ArmRuntime::snapshot(double t) const {
  return PeerSnapshot{theta_meas, vel_hat, tau_ext_hat, t};
}

void ArmRuntime::control(const PeerSnapshot& peer) {
  TickResult r =
      control_tick_with_inertia(cfg, *model, side, peer, theta_meas, vel_hat, tau_ext_hat, M_eff);
  tau_ref_cmd = std::move(r.tau_ref);
  tau_u_cmd = std::move(r.tau_u);
  accel_ref_cmd = std::move(r.accel_ref);
  saturated = std::move(r.saturated);
}

ArmSample ArmRuntime::sample() const {
  ArmSample s;
  s.q = q;
  s.qd = qd;
  s.qd_hat = vel_hat;
  s.tau_ref = tau_ref_cmd;
  s.tau_u = tau_u_cmd;
  s.tau_ext = tau_ext_true;
  s.tau_ext_hat = tau_ext_hat;
  s.saturated = saturated;
  return s;
}

}  // namespace detail

SessionResult run_session(const SessionSetup& setup, const Scenario& scenario) {
  if (!setup.model_leader || !setup.model_follower) throw UsageError("session needs both models");
  const ChainModel& ml = *setup.model_leader;
  const ChainModel& mf = *setup.model_follower;
  if (ml.n_joints != mf.n_joints) throw UsageError("leader/follower joint count mismatch");
  const int n = ml.n_joints;
  scenario.validate(n);

  const Vec start = scenario.start_pose.size() > 0 ? scenario.start_pose : Vec::Zero(n);
  ObserverConfig obs_cfg{setup.observer_omega_c, setup.observer_zeta, scenario.control_dt};

  detail::ArmRuntime leader(ml, setup.cfg_leader, Side::Leader, obs_cfg, start);
  detail::ArmRuntime follower(mf, setup.cfg_follower, Side::Follower, obs_cfg, start);

  const long ticks = std::lround(scenario.duration / scenario.control_dt);
  const int substeps = static_cast<int>(std::lround(scenario.control_dt / scenario.physics_dt));

  SessionResult result;
  result.log.n_joints = n;
  result.log.dt = scenario.control_dt;
  result.log.rows.reserve(ticks + 1);
  result.total_ticks = ticks;

  for (long k = 0; k <= ticks; ++k) {
    const double t = k * scenario.control_dt;
    try {
      leader.sense_and_estimate(scenario.encoder_quantization);
      follower.sense_and_estimate(scenario.encoder_quantization);

      const PeerSnapshot to_follower = leader.snapshot(t);
      const PeerSnapshot to_leader = follower.snapshot(t);
      leader.control(to_leader);
      follower.control(to_follower);

      leader.tau_ext_true = operator_step(scenario.operator_profile, t, leader.q, leader.qd);
      follower.tau_ext_true = environment_step(scenario.environment, follower.q, follower.qd);

      LogRow row;
      row.t = t;
      row.leader = leader.sample();
      row.follower = follower.sample();
      result.log.rows.push_back(std::move(row));

      if (k == ticks) break;
      for (int s = 0; s < substeps; ++s) {
        const double ts = t + s * scenario.physics_dt;
        const Vec tau_hand = operator_step(scenario.operator_profile, ts, leader.q, leader.qd);
        std::tie(leader.q, leader.qd) =
            integrate_step(ml, leader.q, leader.qd, leader.tau_ref_cmd + tau_hand,
                           scenario.physics_dt);
        const Vec tau_wall = environment_step(scenario.environment, follower.q, follower.qd);
        std::tie(follower.q, follower.qd) =
            integrate_step(mf, follower.q, follower.qd, follower.tau_ref_cmd + tau_wall,
                           scenario.physics_dt);
      }
      if (!leader.q.allFinite() || !follower.q.allFinite() || !leader.qd.allFinite() ||
          !follower.qd.allFinite()) {
        throw DomainFault("non-finite plant state");
      }
    } catch (const DomainFault& e) {
      throw DomainFault("tick " + std::to_string(k) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace bilat
