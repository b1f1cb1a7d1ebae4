// End-to-end checks of the command line binary: every subcommand is run as a
// subprocess against files in a temp directory. The binary path comes from
// the build system via SOLARSCHED_CLI_PATH.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(SOLARSCHED_CLI_PATH) + " " + args +
                          " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) {
    res.output.append(buf, n);
  }
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

// Pulls a "key=value" number out of CLI stdout.
double parse_kv(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

void write_zoh_trace(const std::string& path, const std::vector<double>& v,
                     double window_s = 1800.0) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << "timestamp,value\n";
  for (std::size_t k = 0; k < v.size(); ++k) {
    out << static_cast<long long>(k * window_s) << "," << v[k] << "\n";
  }
  out << static_cast<long long>(v.size() * window_s) << ",0\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline on a generated trace") {
  testutil::TempDir tmp;
  const std::string power = tmp.file("power.csv");
  const std::string irr = tmp.file("irr.csv");

  auto gen = run_cli("gen --days 6 --seed 4242 --out-power " + power +
                     " --out-irr " + irr);
  CHECK(gen.exit_code == 0);
  CHECK(gen.output.find("clear_sky_daily_kj=") != std::string::npos);

  const std::string model = tmp.file("model.txt");
  auto fit = run_cli("fit --trace " + power + " --irr " + irr + " --out " +
                     model);
  CHECK(fit.exit_code == 0);
  CHECK(fit.output.find("converged=1") != std::string::npos);
  CHECK(parse_kv(fit.output, "samples") == 5 * 48);

  const std::string pred = tmp.file("pred.csv");
  auto predict = run_cli("predict --trace " + power + " --irr " + irr +
                         " --model " + model +
                         " --from 96 --count 96 --out " + pred);
  CHECK(predict.exit_code == 0);
  CHECK(parse_kv(predict.output, "count") == 96);
  CHECK(parse_kv(predict.output, "mse_ksep_kj2") >= 0.0);
  const std::string pred_text = slurp(pred);
  CHECK(count_lines(pred_text) == 97);
  CHECK(pred_text.rfind("subhour_index,real_kj,ksep_kj,ssep_kj\n", 0) == 0);

  const std::string sched = tmp.file("sched.csv");
  auto schedule =
      run_cli("schedule --trace " + power + " --from 96 --out " + sched);
  CHECK(schedule.exit_code == 0);
  const std::string sched_text = slurp(sched);
  CHECK(sched_text.rfind("slot,power_w,gateway,bits\n", 0) == 0);
  CHECK(count_lines(sched_text) == 49);

  auto baseline = run_cli("schedule --trace " + power +
                          " --from 96 --algo sg_tdma");
  CHECK(baseline.exit_code == 0);
  CHECK(baseline.output.find("sg_tdma: frames=1") != std::string::npos);

  const std::string simdir = tmp.file("sim");
  auto simulate = run_cli("simulate --trace " + power + " --irr " + irr +
                          " --from 96 --days 2 --out " + simdir);
  CHECK(simulate.exit_code == 0);
  CHECK(simulate.output.find("ptfon: frames=2") != std::string::npos);
  CHECK(count_lines(slurp(simdir + "/report.csv")) == 3);
  CHECK(count_lines(slurp(simdir + "/schedule_frame0.csv")) == 49);
  CHECK(count_lines(slurp(simdir + "/schedule_frame1.csv")) == 49);

  std::ifstream jin(simdir + "/report.json");
  nlohmann::json report = nlohmann::json::parse(jin);
  REQUIRE(report["frames"].size() == 2);
  CHECK(report["summaries"][0]["algorithm"] == "ptfon");
  CHECK(report["frames"][0].contains("mse_ksep_kj2"));
}

TEST_CASE("comparison runs are byte-for-byte deterministic") {
  testutil::TempDir tmp;
  const std::string power = tmp.file("power.csv");
  const std::string irr = tmp.file("irr.csv");
  REQUIRE(run_cli("gen --days 5 --seed 7 --out-power " + power + " --out-irr " +
                  irr)
              .exit_code == 0);

  // Frame start 108 is sunrise of day 2, so the short frames below carry
  // nonzero harvest.
  const std::string args = "compare --trace " + power + " --irr " + irr +
                           " --from 108 --days 2 --algos ptf,ptfon,sg_tdma,bcd"
                           " --bcd-restarts 2";
  // One frame-sized config keeps the reference solver cheap.
  const std::string cfg = tmp.file("small.cfg");
  {
    std::ofstream out(cfg);
    out << "bandwidth_hz = 1e7\nnoise_density = 1e-19\nslot_length_s = 1800\n"
        << "slots_per_frame = 4\nepsilon_time_s = 1e-9\n"
        << "gateway_path_loss_db = 78, 92\n";
  }

  const std::string dir_a = tmp.file("a");
  const std::string dir_b = tmp.file("b");
  auto a = run_cli(args + " --config " + cfg + " --out " + dir_a);
  auto b = run_cli(args + " --config " + cfg + " --out " + dir_b);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(a.output == b.output);
  CHECK(slurp(dir_a + "/report.json") == slurp(dir_b + "/report.json"));
  CHECK(slurp(dir_a + "/report.csv") == slurp(dir_b + "/report.csv"));

  std::ifstream jin(dir_a + "/report.json");
  nlohmann::json report = nlohmann::json::parse(jin);
  CHECK(report["frames"].size() == 8);  // 2 frames x 4 algorithms
  REQUIRE(report["summaries"].size() == 4);
  CHECK(report["summaries"][0]["algorithm"] == "ptf");
  CHECK(report["summaries"][3]["algorithm"] == "bcd");
}

TEST_CASE("fit recovers known weights through the file interface") {
  testutil::TempDir tmp;
  // Noise-free draw from the fitted recursion, presented as constant power
  // over each sub-hour. The watt/joule round trip costs a couple of ulps per
  // sample and the near-collinear regressors amplify that, so the recovery
  // band is looser than the in-memory fit tests.
  const solarsched::WeightSet truth{0.5, 0.3, 0.01};
  auto d = testutil::draw_from_model(truth, 0.0, 0.0, 48 * 4, 48, 31337);
  std::vector<double> power(d.z.size());
  for (std::size_t k = 0; k < d.z.size(); ++k) power[k] = d.z[k] / 1800.0;

  const std::string ptrace = tmp.file("p.csv");
  const std::string itrace = tmp.file("i.csv");
  write_zoh_trace(ptrace, power);
  write_zoh_trace(itrace, d.y);

  auto fit = run_cli("fit --trace " + ptrace + " --irr " + itrace);
  CHECK(fit.exit_code == 0);
  CHECK(std::abs(parse_kv(fit.output, "alpha1") - truth.alpha1) <= 1e-4);
  CHECK(std::abs(parse_kv(fit.output, "alpha2") - truth.alpha2) <= 1e-4);
  CHECK(std::abs(parse_kv(fit.output, "beta1") - truth.beta1) <= 1e-4);
  CHECK(parse_kv(fit.output, "iterations") == 1);

  auto ls = run_cli("fit --trace " + ptrace + " --irr " + itrace +
                    " --method ls");
  CHECK(ls.exit_code == 0);
  CHECK(std::abs(parse_kv(ls.output, "alpha1") -
                 parse_kv(fit.output, "alpha1")) <= 1e-8);
}

TEST_CASE("error paths map to distinct exit codes") {
  testutil::TempDir tmp;
  const std::string power = tmp.file("power.csv");
  REQUIRE(run_cli("gen --days 4 --seed 2 --out-power " + power).exit_code ==
          0);

  SUBCASE("insufficient history") {
    auto r = run_cli("simulate --trace " + power +
                     " --predictor oracle --from 50 --days 1");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("error:") != std::string::npos);
  }
  SUBCASE("malformed trace") {
    const std::string bad = tmp.file("bad.csv");
    {
      std::ofstream out(bad);
      out << "timestamp,value\nabc,def\n";
    }
    auto r = run_cli("schedule --trace " + bad);
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("error:") != std::string::npos);
  }
  SUBCASE("fit on a power-only trace is refused with advice") {
    auto r = run_cli("fit --trace " + power);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("--irr") != std::string::npos);
  }
  SUBCASE("missing required option") {
    auto r = run_cli("schedule");
    CHECK(r.exit_code != 0);
  }
  SUBCASE("nonexistent trace file") {
    auto r = run_cli("schedule --trace " + tmp.file("nope.csv"));
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("error") != std::string::npos);
  }
}

TEST_CASE("gap handling is opt-in") {
  testutil::TempDir tmp;
  // 48 full sub-hour windows of 10 W plus a trailing partial window: the
  // trace ends 900 s into window 48, which is a coverage gap.
  const std::string path = tmp.file("gappy.csv");
  {
    std::ofstream out(path);
    out << "timestamp,value\n";
    for (int k = 0; k <= 48; ++k) out << (k * 1800) << ",10\n";
    out << (48 * 1800 + 900) << ",0\n";
  }

  auto strict = run_cli("schedule --trace " + path + " --from 0");
  CHECK(strict.exit_code == 3);

  auto filled =
      run_cli("schedule --trace " + path + " --from 0 --fill-gaps zero");
  CHECK(filled.exit_code == 0);
}

TEST_CASE("reference solver runs are exposed and deterministic") {
  testutil::TempDir tmp;
  const std::string power = tmp.file("power.csv");
  REQUIRE(run_cli("gen --days 4 --seed 5 --out-power " + power).exit_code ==
          0);
  const std::string cfg = tmp.file("small.cfg");
  {
    std::ofstream out(cfg);
    out << "bandwidth_hz = 1e7\nnoise_density = 1e-19\nslot_length_s = 1800\n"
        << "slots_per_frame = 6\nepsilon_time_s = 1e-9\n"
        << "gateway_path_loss_db = 78, 100\n";
  }

  const std::string alloc = tmp.file("alloc.csv");
  const std::string trace = tmp.file("trace.csv");
  const std::string args = "schedule --config " + cfg + " --trace " + power +
                           " --from 108 --algo bcd --restarts 3 --out " +
                           alloc + " --trace-out " + trace;
  auto a = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.output.find("converged=1") != std::string::npos);
  CHECK(parse_kv(a.output, "utility") > 0.0);

  const std::string alloc_text = slurp(alloc);
  CHECK(alloc_text.rfind("slot,power_w,time_s_g1,time_s_g2\n", 0) == 0);
  CHECK(count_lines(alloc_text) == 7);
  CHECK(slurp(trace).rfind("iteration,utility,violation\n", 0) == 0);

  auto b = run_cli(args);
  CHECK(b.output == a.output);
  CHECK(slurp(alloc) == alloc_text);
}

}  // TEST_SUITE("cli")
