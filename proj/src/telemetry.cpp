#include "bilat/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bilat {

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

void append_arm_header(std::ostringstream& os, const std::string& prefix, int n) {
  const char* groups[] = {"q", "qd", "qdhat", "tau_ref", "tau_u", "tau_ext", "tau_exthat", "sat"};
  for (const char* g : groups) {
    for (int i = 1; i <= n; ++i) os << "," << prefix << "_" << g << i;
  }
}

void check_arm(const ArmSample& a, int n) {
  if (a.q.size() != n || a.qd.size() != n || a.qd_hat.size() != n || a.tau_ref.size() != n ||
      a.tau_u.size() != n || a.tau_ext.size() != n || a.tau_ext_hat.size() != n ||
      a.saturated.size() != n) {
    throw UsageError("telemetry arm sample has wrong width");
  }
  if (!a.q.allFinite() || !a.qd.allFinite() || !a.qd_hat.allFinite() || !a.tau_ref.allFinite() ||
      !a.tau_u.allFinite() || !a.tau_ext.allFinite() || !a.tau_ext_hat.allFinite()) {
    throw DomainFault("non-finite telemetry sample");
  }
}

void write_arm(std::ostream& os, const ArmSample& a) {
  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    os << buf;
  };
  for (int i = 0; i < a.q.size(); ++i) emit(a.q[i]);
  for (int i = 0; i < a.qd.size(); ++i) emit(a.qd[i]);
  for (int i = 0; i < a.qd_hat.size(); ++i) emit(a.qd_hat[i]);
  for (int i = 0; i < a.tau_ref.size(); ++i) emit(a.tau_ref[i]);
  for (int i = 0; i < a.tau_u.size(); ++i) emit(a.tau_u[i]);
  for (int i = 0; i < a.tau_ext.size(); ++i) emit(a.tau_ext[i]);
  for (int i = 0; i < a.tau_ext_hat.size(); ++i) emit(a.tau_ext_hat[i]);
  for (int i = 0; i < a.saturated.size(); ++i) os << "," << (a.saturated[i] ? 1 : 0);
}

ArmSample read_arm(const std::vector<double>& fields, std::size_t& pos, int n) {
  ArmSample a;
  auto take_vec = [&] {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = fields.at(pos++);
    return v;
  };
  a.q = take_vec();
  a.qd = take_vec();
  a.qd_hat = take_vec();
  a.tau_ref = take_vec();
  a.tau_u = take_vec();
  a.tau_ext = take_vec();
  a.tau_ext_hat = take_vec();
  a.saturated.resize(n);
  for (int i = 0; i < n; ++i) a.saturated[i] = fields.at(pos++) != 0.0;
  return a;
}

}  // namespace

void TelemetryLog::validate() const {
  if (rows.empty()) throw UsageError("empty telemetry log");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    check_arm(rows[k].leader, n_joints);
    check_arm(rows[k].follower, n_joints);
    if (k > 0 && std::abs(rows[k].t - rows[k - 1].t - dt) > 1e-9) {
      throw UsageError("telemetry rows not evenly spaced");
    }
  }
}

void write_telemetry_csv(const TelemetryLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write telemetry file: " + path);
  std::ostringstream header;
  header << "t";
  append_arm_header(header, "l", log.n_joints);
  append_arm_header(header, "f", log.n_joints);
  out << header.str() << "\n";
  char buf[32];
  for (const LogRow& row : log.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.t);
    out << buf;
    write_arm(out, row.leader);
    write_arm(out, row.follower);
    out << "\n";
  }
}

TelemetryLog read_telemetry_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open telemetry file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw UsageError("telemetry file is empty: " + path);

  // Column count fixes the joint count: 1 + 2 * 8 * n fields.
  const long commas = std::count(line.begin(), line.end(), ',');
  if (commas <= 0 || commas % 16 != 0) {
    throw UsageError("telemetry header has unexpected column count");
  }
  const int n = static_cast<int>(commas / 16);

  TelemetryLog log;
  log.n_joints = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    fields.reserve(static_cast<std::size_t>(commas) + 1);
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(std::stod(cell));
    if (fields.size() != static_cast<std::size_t>(commas) + 1) {
      throw UsageError("telemetry row has wrong field count");
    }
    LogRow row;
    std::size_t pos = 0;
    row.t = fields[pos++];
    row.leader = read_arm(fields, pos, n);
    row.follower = read_arm(fields, pos, n);
    log.rows.push_back(std::move(row));
  }
  if (log.rows.size() >= 2) log.dt = log.rows[1].t - log.rows[0].t;
  log.validate();
  return log;
}

SessionMetrics compute_mae(const TelemetryLog& log) {
  if (log.rows.empty()) throw UsageError("compute_mae on empty log");
  const int n = log.n_joints;
  SessionMetrics m;
  double angle_sum = 0.0, vel_sum = 0.0, torque_sum = 0.0;
  double obs_l_sq = 0.0, obs_f_sq = 0.0;
  for (const LogRow& row : log.rows) {
    angle_sum += (row.leader.q - row.follower.q).cwiseAbs().sum();
    vel_sum += (row.leader.qd - row.follower.qd).cwiseAbs().sum();
    torque_sum += (row.leader.tau_ext_hat + row.follower.tau_ext_hat).cwiseAbs().sum();
    obs_l_sq += (row.leader.qd_hat - row.leader.qd).squaredNorm();
    obs_f_sq += (row.follower.qd_hat - row.follower.qd).squaredNorm();
    m.saturation_count_leader += row.leader.saturated.count();
    m.saturation_count_follower += row.follower.saturated.count();
  }
  const double cells = static_cast<double>(log.rows.size()) * n;
  m.angle_mae_deg = angle_sum / cells * kRadToDeg;
  m.velocity_mae_deg_s = vel_sum / cells * kRadToDeg;
  m.torque_mae_nm = torque_sum / cells;
  m.obs_vel_rms_leader_deg_s = std::sqrt(obs_l_sq / cells) * kRadToDeg;
  m.obs_vel_rms_follower_deg_s = std::sqrt(obs_f_sq / cells) * kRadToDeg;
  return m;
}

}  // namespace bilat
