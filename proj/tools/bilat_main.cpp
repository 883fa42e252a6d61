// bilat: model/scenario loading, identification runs, teleoperation
// sessions across all comparison modes, MAE tables, and plot emission.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bilat/controller.hpp"
#include "bilat/identify.hpp"
#include "bilat/model.hpp"
#include "bilat/plot.hpp"
#include "bilat/sim.hpp"
#include "bilat/telemetry.hpp"

namespace fs = std::filesystem;
using namespace bilat;

namespace {

const TeleopMode kCompareOrder[] = {
    TeleopMode::Unilateral,        TeleopMode::SymmetricPosition, TeleopMode::ForceFeedback,
    TeleopMode::FourChFixedInertia, TeleopMode::FourChNoCoriolis, TeleopMode::FourChPseudoDiff,
    TeleopMode::FourChProposed,
};

struct SessionOptions {
  std::string model_path;
  std::string scenario_path;
  std::string out_dir = "out";
  std::string mode_name = teleop_mode_name(TeleopMode::FourChProposed);
  bool concurrent = false;
  bool quantize = false;
  std::uint64_t seed = 0;
};

Scenario resolve_scenario(const SessionOptions& opt, const ChainModel& model) {
  Scenario s = opt.scenario_path.empty() ? default_swing_scenario()
                                         : load_scenario(opt.scenario_path, model.n_joints);
  if (opt.quantize) s.encoder_quantization = true;
  if (opt.seed != 0) s.seed = opt.seed;
  return s;
}

SessionResult run_mode(const ChainModel& model, const Scenario& scenario, TeleopMode mode,
                       bool concurrent) {
  SessionSetup setup;
  setup.model_leader = &model;
  setup.model_follower = &model;
  setup.cfg_leader.mode = mode;
  setup.cfg_follower.mode = mode;
  return concurrent ? concurrent_session(setup, scenario) : run_session(setup, scenario);
}

void print_metrics_header(std::ostream& os) {
  os << "# torque MAE = mean |tau_ext_hat_l + tau_ext_hat_f| "
        "(leader sign reversal convention)\n";
  os << "mode,angle_mae_deg,velocity_mae_deg_s,torque_mae_nm,"
        "obs_vel_rms_l_deg_s,obs_vel_rms_f_deg_s,sat_l,sat_f\n";
}

void print_metrics_row(std::ostream& os, const std::string& name, const SessionMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%ld,%ld\n", name.c_str(),
                m.angle_mae_deg, m.velocity_mae_deg_s, m.torque_mae_nm,
                m.obs_vel_rms_leader_deg_s, m.obs_vel_rms_follower_deg_s,
                m.saturation_count_leader, m.saturation_count_follower);
  os << buf;
}

int cmd_simulate(const SessionOptions& opt) {
  const ChainModel model = load_chain_model(opt.model_path);
  const Scenario scenario = resolve_scenario(opt, model);
  const TeleopMode mode = teleop_mode_from_name(opt.mode_name);
  const SessionResult result = run_mode(model, scenario, mode, opt.concurrent);

  fs::create_directories(opt.out_dir);
  const std::string log_path = opt.out_dir + "/" + teleop_mode_name(mode) + ".csv";
  write_telemetry_csv(result.log, log_path);
  const SessionMetrics m = compute_mae(result.log);
  print_metrics_header(std::cout);
  print_metrics_row(std::cout, teleop_mode_name(mode), m);
  if (opt.concurrent) {
    std::cout << "missed_ticks," << result.missed_ticks << "/" << result.total_ticks << "\n";
  }
  std::cout << "log," << log_path << "\n";
  return 0;
}

int cmd_compare(const SessionOptions& opt) {
  const ChainModel model = load_chain_model(opt.model_path);
  const Scenario scenario = resolve_scenario(opt, model);

  fs::create_directories(opt.out_dir);
  std::ostringstream table;
  print_metrics_header(table);
  for (TeleopMode mode : kCompareOrder) {
    const SessionResult result = run_mode(model, scenario, mode, opt.concurrent);
    write_telemetry_csv(result.log, opt.out_dir + "/" + teleop_mode_name(mode) + ".csv");
    print_metrics_row(table, teleop_mode_name(mode), compute_mae(result.log));
  }
  std::ofstream csv(opt.out_dir + "/metrics.csv");
  if (!csv) throw UsageError("cannot write metrics table");
  csv << table.str();
  std::ofstream txt(opt.out_dir + "/metrics.txt");
  txt << table.str();
  std::cout << table.str();
  return 0;
}

int cmd_metrics(const std::string& log_path) {
  const TelemetryLog log = read_telemetry_csv(log_path);
  print_metrics_header(std::cout);
  print_metrics_row(std::cout, fs::path(log_path).stem().string(), compute_mae(log));
  return 0;
}

struct IdentifyOptions {
  std::string model_path;
  std::string out_dir = "out";
  double duration = 60.0;
  double sample_hz = 500.0;
  double target_hz = 25.0;
  double torque_noise = 0.0;
  std::uint64_t seed = 1;
};

int cmd_identify(const IdentifyOptions& opt) {
  const ChainModel model = load_chain_model(opt.model_path);
  ExcitationConfig exc;
  exc.duration = opt.duration;
  exc.sample_hz = opt.sample_hz;
  exc.seed = opt.seed;
  exc.torque_noise = opt.torque_noise;
  const TrajectoryData raw = generate_excitation(model, exc);
  Vec y;
  const Mat Y = stack_filtered_regressor(model, raw, opt.target_hz, &y);
  const IdentResult result = least_squares_identify(model, Y, y);

  fs::create_directories(opt.out_dir);
  const std::string phi_path = opt.out_dir + "/phi_hat.json";
  save_param_fragment(result.phi, phi_path);

  double max_rel_err = 0.0;
  for (int j = 0; j < result.phi.size(); ++j) {
    if (!result.identifiable[j]) continue;
    const double truth = model.phi.values[j];
    if (std::abs(truth) < 1e-12) continue;
    max_rel_err = std::max(max_rel_err, std::abs(result.phi.values[j] - truth) / std::abs(truth));
  }
  std::cout << "samples," << Y.rows() / model.n_joints << "\n"
            << "rank," << result.rank << "/" << result.phi.size() << "\n"
            << "cond," << result.cond << "\n"
            << "rms_residual_nm," << result.rms_residual << "\n"
            << "max_rel_err_vs_model," << max_rel_err << "\n"
            << "phi," << phi_path << "\n";
  return 0;
}

void emit_group(const TelemetryLog& log, const std::string& arm, const std::string& out_dir,
                const std::string& group, const std::vector<PlotSeries>& series,
                const std::string& y_label) {
  PlotConfig cfg;
  cfg.title = arm + " " + group;
  cfg.x_label = "time [s]";
  cfg.y_label = y_label;
  const std::string base = out_dir + "/" + arm + "_" + group;
  write_svg_plot(series, cfg, base + ".svg");
  std::ofstream csv(base + ".csv");
  if (!csv) throw UsageError("cannot write plot data file");
  csv << "t";
  for (const PlotSeries& s : series) csv << "," << s.label;
  csv << "\n";
  for (std::size_t k = 0; k < series.front().x.size(); ++k) {
    csv << series.front().x[k];
    for (const PlotSeries& s : series) csv << "," << s.y[k];
    csv << "\n";
  }
  (void)log;
}

int cmd_plot(const std::string& log_path, const std::string& out_dir) {
  const TelemetryLog log = read_telemetry_csv(log_path);
  fs::create_directories(out_dir);
  const int n = log.n_joints;
  std::vector<double> t;
  t.reserve(log.rows.size());
  for (const LogRow& r : log.rows) t.push_back(r.t);

  auto column = [&](bool leader, auto member, int j) {
    std::vector<double> v;
    v.reserve(log.rows.size());
    for (const LogRow& r : log.rows) {
      const ArmSample& a = leader ? r.leader : r.follower;
      v.push_back((a.*member)[j]);
    }
    return v;
  };

  for (bool leader : {true, false}) {
    const std::string arm = leader ? "leader" : "follower";
    std::vector<PlotSeries> angles;
    for (int j = 0; j < n; ++j) {
      angles.push_back({"q" + std::to_string(j + 1), t, column(leader, &ArmSample::q, j)});
    }
    emit_group(log, arm, out_dir, "angles", angles, "angle [rad]");

    std::vector<PlotSeries> vel;
    for (int j = 0; j < n; ++j) {
      vel.push_back({"qd" + std::to_string(j + 1), t, column(leader, &ArmSample::qd, j)});
      vel.push_back({"qdhat" + std::to_string(j + 1), t, column(leader, &ArmSample::qd_hat, j)});
    }
    emit_group(log, arm, out_dir, "velocity", vel, "velocity [rad/s]");

    std::vector<PlotSeries> torque;
    for (int j = 0; j < n; ++j) {
      torque.push_back({"tau_ext" + std::to_string(j + 1), t, column(leader, &ArmSample::tau_ext, j)});
      torque.push_back(
          {"tau_exthat" + std::to_string(j + 1), t, column(leader, &ArmSample::tau_ext_hat, j)});
    }
    emit_group(log, arm, out_dir, "torque", torque, "torque [N*m]");
  }
  std::cout << "plots," << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin-manipulator 4-channel bilateral teleoperation toolkit"};
  app.require_subcommand(1);

  SessionOptions sopt;
  IdentifyOptions iopt;
  std::string log_path, plot_out = "out";

  auto add_session_flags = [&](CLI::App* cmd, bool with_mode) {
    cmd->add_option("--model", sopt.model_path, "model JSON file")->required();
    cmd->add_option("--scenario", sopt.scenario_path, "scenario JSON file (default: built-in swing)");
    cmd->add_option("--out", sopt.out_dir, "output directory");
    if (with_mode) cmd->add_option("--mode", sopt.mode_name, "teleoperation mode name");
    cmd->add_flag("--concurrent", sopt.concurrent, "threaded real-time tasks");
    cmd->add_flag_callback(
        "--deterministic", [&] { sopt.concurrent = false; },
        "lockstep single-threaded run (default)");
    cmd->add_flag("--quantize-encoders", sopt.quantize, "12-bit encoder quantization");
    cmd->add_option("--seed", sopt.seed, "scenario seed override");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run one scenario/mode, write a telemetry log");
  add_session_flags(simulate, true);
  CLI::App* compare = app.add_subcommand("compare", "run all seven modes, write the MAE table");
  add_session_flags(compare, false);

  CLI::App* identify = app.add_subcommand("identify", "identify dynamic parameters from synthetic excitation");
  identify->add_option("--model", iopt.model_path, "model JSON file")->required();
  identify->add_option("--out", iopt.out_dir, "output directory");
  identify->add_option("--duration", iopt.duration, "excitation length [s]");
  identify->add_option("--sample-hz", iopt.sample_hz, "raw sample rate [Hz]");
  identify->add_option("--target-hz", iopt.target_hz, "identification rate [Hz]");
  identify->add_option("--noise", iopt.torque_noise, "relative torque noise level");
  identify->add_option("--seed", iopt.seed, "excitation seed");

  CLI::App* plot = app.add_subcommand("plot", "emit SVG plots and data files from a telemetry log");
  plot->add_option("--log", log_path, "telemetry CSV")->required();
  plot->add_option("--out", plot_out, "output directory");

  CLI::App* metrics = app.add_subcommand("metrics", "print the MAE report of a telemetry log");
  metrics->add_option("--log", log_path, "telemetry CSV")->required();

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) return cmd_simulate(sopt);
    if (compare->parsed()) return cmd_compare(sopt);
    if (identify->parsed()) return cmd_identify(iopt);
    if (plot->parsed()) return cmd_plot(log_path, plot_out);
    if (metrics->parsed()) return cmd_metrics(log_path);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainFault& e) {
    std::cerr << "domain fault: " << e.what() << "\n";
    return 1;
  }
}
