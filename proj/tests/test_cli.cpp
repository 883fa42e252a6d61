#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_helpers.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("BILAT_CLI");
  REQUIRE(env != nullptr);
  return std::string(env);
}

/// Runs the CLI with the given arguments, captures stdout+stderr, and
/// returns the exit code.
int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string out_file = "cli_capture.txt";
  const std::string cmd = cli_path() + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  std::remove(out_file.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string model_arg() { return "--model " + bilat_test::model_path(); }

/// A short swing so the CLI round trips stay fast.
std::string short_scenario() {
  const std::string path = "cli_short_scenario.json";
  std::ofstream out(path);
  out << R"({"duration": 0.6, "operator": {"kind": "swing", "joint": 1,
             "amplitude": 0.2, "period": 0.3, "reps": 1, "start": 0.1,
             "smooth": 0.03, "stiffness": 5.0, "damping": 0.1,
             "max_torque": 2.5}})";
  return path;
}

int count_data_rows(const std::string& csv_path, std::string* header = nullptr) {
  std::ifstream in(csv_path);
  REQUIRE(in.good());
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header && header->empty()) {
      *header = line;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("help exits cleanly, missing subcommand is a usage error") {
  std::string out;
  CHECK(run_cli("--help", &out) == 0);
  CHECK(out.find("simulate") != std::string::npos);
  CHECK(out.find("identify") != std::string::npos);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("no-such-command") == 2);
}

TEST_CASE("bad inputs exit with the usage code") {
  CHECK(run_cli("simulate --model does_not_exist.json") == 2);
  CHECK(run_cli("simulate " + model_arg() + " --mode no-such-mode --out cli_out_bad") == 2);
  CHECK(run_cli("metrics --log does_not_exist.csv") == 2);
  CHECK(run_cli("plot --log does_not_exist.csv") == 2);
  CHECK(run_cli("simulate " + model_arg() + " --scenario does_not_exist.json") == 2);
}

TEST_CASE("simulate writes a per-mode log and prints the metrics row") {
  const std::string scenario = short_scenario();
  std::string out;
  const int code = run_cli("simulate " + model_arg() + " --scenario " + scenario +
                               " --mode 4ch-proposed --out cli_out_sim",
                           &out);
  CHECK(code == 0);
  CHECK(fs::exists("cli_out_sim/4ch-proposed.csv"));
  CHECK(out.find("mode,angle_mae_deg") != std::string::npos);
  CHECK(out.find("4ch-proposed,") != std::string::npos);

  // The emitted log feeds straight back into metrics.
  std::string mout;
  CHECK(run_cli("metrics --log cli_out_sim/4ch-proposed.csv", &mout) == 0);
  CHECK(mout.find("4ch-proposed,") != std::string::npos);

  // And into plot: one SVG and one data file per arm and signal group.
  std::string pout;
  CHECK(run_cli("plot --log cli_out_sim/4ch-proposed.csv --out cli_out_plot", &pout) == 0);
  for (const std::string arm : {"leader", "follower"}) {
    for (const std::string group : {"angles", "velocity", "torque"}) {
      CHECK(fs::exists("cli_out_plot/" + arm + "_" + group + ".svg"));
      CHECK(fs::exists("cli_out_plot/" + arm + "_" + group + ".csv"));
    }
  }
  fs::remove_all("cli_out_sim");
  fs::remove_all("cli_out_plot");
  std::remove(scenario.c_str());
}

TEST_CASE("compare emits the seven-mode table in presentation order") {
  const std::string scenario = short_scenario();
  std::string out;
  const int code =
      run_cli("compare " + model_arg() + " --scenario " + scenario + " --out cli_out_cmp", &out);
  CHECK(code == 0);

  std::string header;
  CHECK(count_data_rows("cli_out_cmp/metrics.csv", &header) == 7);
  CHECK(header.find("mode,angle_mae_deg") == 0);

  const std::vector<std::string> order = {
      "unilateral",     "symmetric-position", "force-feedback", "4ch-fixed-inertia",
      "4ch-no-coriolis", "4ch-pseudo-diff",   "4ch-proposed"};
  std::ifstream in("cli_out_cmp/metrics.csv");
  std::string line;
  std::size_t next = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("mode,", 0) == 0) continue;
    REQUIRE(next < order.size());
    CHECK(line.rfind(order[next] + ",", 0) == 0);
    CHECK(fs::exists("cli_out_cmp/" + order[next] + ".csv"));
    ++next;
  }
  CHECK(next == order.size());
  fs::remove_all("cli_out_cmp");
  std::remove(scenario.c_str());
}

TEST_CASE("identify writes a loadable parameter fragment") {
  std::string out;
  const int code = run_cli(
      "identify " + model_arg() + " --duration 6 --seed 2 --out cli_out_ident", &out);
  CHECK(code == 0);
  CHECK(fs::exists("cli_out_ident/phi_hat.json"));
  CHECK(out.find("rank,") != std::string::npos);
  CHECK(out.find("max_rel_err_vs_model,") != std::string::npos);

  // Noiseless short run: the identifiable subspace is recovered tightly.
  std::istringstream lines(out);
  std::string line;
  double max_rel = -1.0;
  while (std::getline(lines, line)) {
    if (line.rfind("max_rel_err_vs_model,", 0) == 0) {
      max_rel = std::stod(line.substr(line.find(',') + 1));
    }
  }
  CHECK(max_rel >= 0.0);
  CHECK(max_rel < 1e-5);
  fs::remove_all("cli_out_ident");
}

TEST_CASE("deterministic reruns produce identical logs") {
  const std::string scenario = short_scenario();
  CHECK(run_cli("simulate " + model_arg() + " --scenario " + scenario +
                " --mode 4ch-proposed --quantize-encoders --out cli_out_a") == 0);
  CHECK(run_cli("simulate " + model_arg() + " --scenario " + scenario +
                " --mode 4ch-proposed --quantize-encoders --out cli_out_b") == 0);
  std::ifstream a("cli_out_a/4ch-proposed.csv"), b("cli_out_b/4ch-proposed.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
  fs::remove_all("cli_out_a");
  fs::remove_all("cli_out_b");
  std::remove(scenario.c_str());
}
