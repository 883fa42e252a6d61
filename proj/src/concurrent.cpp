#include <pthread.h>
#include <sched.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

#include "bilat/sim.hpp"
#include "arm_runtime.hpp"

namespace bilat {

namespace {

using Clock = std::chrono::steady_clock;

/// Latest-value mailbox; writers overwrite, readers take a copy.
template <typename T>
class Latest {
 public:
  explicit Latest(T initial) : v_(std::move(initial)) {}
  void store(const T& v) {
    std::lock_guard<std::mutex> g(m_);
    v_ = v;
  }
  T load() const {
    std::lock_guard<std::mutex> g(m_);
    return v_;
  }

 private:
  mutable std::mutex m_;
  T v_;
};

struct PlantMsg {
  double t = 0.0;
  Vec q_l, q_f;
};

/// What a controller publishes each tick: the channel snapshot for the
/// peer, the command for the physics loop, and its telemetry share.
struct CtlMsg {
  PeerSnapshot peer;
  Vec tau_ref;
  Vec qd_hat, tau_u, tau_ext_hat;
  Eigen::Array<bool, Eigen::Dynamic, 1> saturated;
};

CtlMsg initial_ctl_msg(const Vec& start, int n) {
  CtlMsg m;
  m.peer = PeerSnapshot{start, Vec::Zero(n), Vec::Zero(n), 0.0};
  m.tau_ref = Vec::Zero(n);
  m.qd_hat = Vec::Zero(n);
  m.tau_u = Vec::Zero(n);
  m.tau_ext_hat = Vec::Zero(n);
  m.saturated.setConstant(n, false);
  return m;
}

struct TaskStats {
  long iterations = 0;
  long missed = 0;
};

/// Best-effort soft real-time scheduling: a plain CFS thread woken by a
/// timer can wait out the wakeup granularity (~1 ms) before it preempts a
/// busy sibling, which at a 1 ms period is a whole tick. SCHED_FIFO makes
/// the wake-up preempt immediately. Silently keeps the default policy if
/// the environment does not allow it.
void request_rt_priority() {
  sched_param sp{};
  sp.sched_priority = 10;
  (void)pthread_setschedparam(pthread_self(), SCHED_FIFO, &sp);
}

/// Coarse sleep to just short of the deadline, then yield-spin the rest:
/// plain sleep_until overshoots by the kernel timer slack, which at a
/// 1 ms period is a tick-miss all by itself on a busy machine.
void sleep_until_precise(Clock::time_point deadline) {
  constexpr auto kSpinMargin = std::chrono::microseconds(150);
  if (deadline - Clock::now() > kSpinMargin) {
    std::this_thread::sleep_until(deadline - kSpinMargin);
  }
  while (Clock::now() < deadline) std::this_thread::yield();
}

}  // namespace

SessionResult concurrent_session(const SessionSetup& setup, const Scenario& scenario) {
  if (!setup.model_leader || !setup.model_follower) throw UsageError("session needs both models");
  const ChainModel& ml = *setup.model_leader;
  const ChainModel& mf = *setup.model_follower;
  if (ml.n_joints != mf.n_joints) throw UsageError("leader/follower joint count mismatch");
  const int n = ml.n_joints;
  scenario.validate(n);

  const Vec start = scenario.start_pose.size() > 0 ? scenario.start_pose : Vec::Zero(n);
  ObserverConfig obs_cfg{setup.observer_omega_c, setup.observer_zeta, scenario.control_dt};
  const long ticks = std::lround(scenario.duration / scenario.control_dt);
  const int substeps = static_cast<int>(std::lround(scenario.control_dt / scenario.physics_dt));
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(scenario.control_dt));

  Latest<PlantMsg> plant_box(PlantMsg{0.0, start, start});
  Latest<CtlMsg> leader_box(initial_ctl_msg(start, n));
  Latest<CtlMsg> follower_box(initial_ctl_msg(start, n));

  std::atomic<bool> done{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto record_error = [&] {
    std::lock_guard<std::mutex> g(error_mutex);
    if (!first_error) first_error = std::current_exception();
    done.store(true);
  };

  SessionResult result;
  result.log.n_joints = n;
  result.log.dt = scenario.control_dt;
  result.log.rows.reserve(ticks + 1);

  TaskStats stats_physics, stats_leader, stats_follower;
  const Clock::time_point t0 = Clock::now() + period;  // settle-in margin

  // The three tasks run phase-staggered across the period: on few-core
  // machines a shared deadline serialises all three wake-ups at the same
  // instant and the last one in line eats the whole queueing delay.
  auto controller_task = [&](Side side, const ChainModel& model, const ControllerConfig& cfg,
                             Latest<CtlMsg>& own_box, Latest<CtlMsg>& peer_box,
                             Clock::duration phase, TaskStats& stats) {
    try {
      request_rt_priority();
      detail::ArmRuntime arm(model, cfg, side, obs_cfg, start);
      for (long k = 0; !done.load(std::memory_order_relaxed); ++k) {
        const PlantMsg plant = plant_box.load();
        arm.q = (side == Side::Leader) ? plant.q_l : plant.q_f;
        arm.sense_and_estimate(scenario.encoder_quantization);
        arm.control(peer_box.load().peer);
        CtlMsg msg;
        msg.peer = arm.snapshot(plant.t);
        msg.tau_ref = arm.tau_ref_cmd;
        msg.qd_hat = arm.vel_hat;
        msg.tau_u = arm.tau_u_cmd;
        msg.tau_ext_hat = arm.tau_ext_hat;
        msg.saturated = arm.saturated;
        own_box.store(msg);

        const Clock::time_point deadline = t0 + (k + 1) * period + phase;
        ++stats.iterations;
        if (Clock::now() > deadline) ++stats.missed;
        sleep_until_precise(deadline);
      }
    } catch (...) {
      record_error();
    }
  };

  auto physics_task = [&] {
    try {
      request_rt_priority();
      Vec q_l = start, qd_l = Vec::Zero(n);
      Vec q_f = start, qd_f = Vec::Zero(n);
      for (long k = 0; k <= ticks && !done.load(std::memory_order_relaxed); ++k) {
        const double t = k * scenario.control_dt;
        const CtlMsg msg_l = leader_box.load();
        const CtlMsg msg_f = follower_box.load();
        const Vec hand = operator_step(scenario.operator_profile, t, q_l, qd_l);
        const Vec wall = environment_step(scenario.environment, q_f, qd_f);

        LogRow row;
        row.t = t;
        row.leader.q = q_l;
        row.leader.qd = qd_l;
        row.leader.qd_hat = msg_l.qd_hat;
        row.leader.tau_ref = msg_l.tau_ref;
        row.leader.tau_u = msg_l.tau_u;
        row.leader.tau_ext = hand;
        row.leader.tau_ext_hat = msg_l.tau_ext_hat;
        row.leader.saturated = msg_l.saturated;
        row.follower.q = q_f;
        row.follower.qd = qd_f;
        row.follower.qd_hat = msg_f.qd_hat;
        row.follower.tau_ref = msg_f.tau_ref;
        row.follower.tau_u = msg_f.tau_u;
        row.follower.tau_ext = wall;
        row.follower.tau_ext_hat = msg_f.tau_ext_hat;
        row.follower.saturated = msg_f.saturated;
        result.log.rows.push_back(std::move(row));
        if (k == ticks) break;

        for (int s = 0; s < substeps; ++s) {
          const double ts = t + s * scenario.physics_dt;
          const Vec tau_hand = operator_step(scenario.operator_profile, ts, q_l, qd_l);
          std::tie(q_l, qd_l) =
              integrate_step(ml, q_l, qd_l, msg_l.tau_ref + tau_hand, scenario.physics_dt);
          const Vec tau_wall = environment_step(scenario.environment, q_f, qd_f);
          std::tie(q_f, qd_f) =
              integrate_step(mf, q_f, qd_f, msg_f.tau_ref + tau_wall, scenario.physics_dt);
        }
        if (!q_l.allFinite() || !q_f.allFinite() || !qd_l.allFinite() || !qd_f.allFinite()) {
          throw DomainFault("tick " + std::to_string(k) + ": non-finite plant state");
        }
        plant_box.store(PlantMsg{(k + 1) * scenario.control_dt, q_l, q_f});

        const Clock::time_point deadline = t0 + (k + 1) * period;
        ++stats_physics.iterations;
        if (Clock::now() > deadline) ++stats_physics.missed;
        sleep_until_precise(deadline);
      }
      done.store(true);
    } catch (...) {
      record_error();
    }
  };

  std::thread th_leader(controller_task, Side::Leader, std::cref(ml), std::cref(setup.cfg_leader),
                        std::ref(leader_box), std::ref(follower_box), period / 3,
                        std::ref(stats_leader));
  std::thread th_follower(controller_task, Side::Follower, std::cref(mf),
                          std::cref(setup.cfg_follower), std::ref(follower_box),
                          std::ref(leader_box), 2 * period / 3, std::ref(stats_follower));
  std::thread th_physics(physics_task);

  th_physics.join();
  th_leader.join();
  th_follower.join();
  if (first_error) std::rethrow_exception(first_error);

  if (std::getenv("BILAT_RT_DEBUG")) {
    std::fprintf(stderr, "rt debug: physics %ld/%ld leader %ld/%ld follower %ld/%ld\n",
                 stats_physics.missed, stats_physics.iterations, stats_leader.missed,
                 stats_leader.iterations, stats_follower.missed, stats_follower.iterations);
  }
  result.missed_ticks = stats_physics.missed + stats_leader.missed + stats_follower.missed;
  result.total_ticks = stats_physics.iterations + stats_leader.iterations + stats_follower.iterations;
  return result;
}

}  // namespace bilat
