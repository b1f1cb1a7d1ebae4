#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "solarsched/scheduler.hpp"
#include "test_util.hpp"

using namespace solarsched;

namespace {

// Independent reference for the flat-power profile: the lower convex hull of
// the cumulative-energy polyline (greatest convex minorant), turned into
// per-slot slopes. Uses the monotone-chain construction instead of the
// production segment-by-segment search.
std::vector<double> hull_power(const std::vector<double>& energy_j, double t) {
  const int k = static_cast<int>(energy_j.size());
  std::vector<double> cum(k + 1, 0.0);
  for (int i = 0; i < k; ++i) cum[i + 1] = cum[i] + energy_j[i];

  std::vector<int> hull;
  for (int j = 0; j <= k; ++j) {
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2];
      const int b = hull[hull.size() - 1];
      const double cross = (b - a) * (cum[j] - cum[a]) -
                           (cum[b] - cum[a]) * (j - a);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(j);
  }

  std::vector<double> p(k, 0.0);
  for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
    const int a = hull[s], b = hull[s + 1];
    const double slope = (cum[b] - cum[a]) / ((b - a) * t);
    for (int i = a; i < b; ++i) p[i] = slope;
  }
  return p;
}

std::vector<double> random_energies(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> e(k);
  for (int i = 0; i < k; ++i) {
    e[i] = unif(rng) < 0.25 ? 0.0 : 1e5 * unif(rng);
  }
  return e;
}

// Deterministic nonnegative sub-hour timeline with a diurnal bump and a
// small ripple; irradiation channel scaled down from the energy channel
// with its own offset so the two stay linearly independent.
SubHourSeries diurnal_timeline(int length) {
  SubHourSeries s;
  s.irradiation_is_proxy = false;
  const double pi = 3.14159265358979323846;
  for (int k = 0; k < length; ++k) {
    const int j = k % 48;
    double e = 0.0;
    if (j >= 12 && j < 36) {
      e = 40000.0 * std::sin(pi * (j - 12) / 24.0) + 500.0 * ((k * 37) % 11);
    }
    const double y = e / 45.0 + 3.0 * ((k * 13) % 7);
    s.values.push_back({e, y, false});
  }
  return s;
}

double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("flat power spreads energy forward and defers bursts") {
  const SystemConfig cfg = testutil::make_config({78.0}, 2);

  SUBCASE("early harvest is spread over both slots") {
    auto p = flat_power_allocation({3600.0, 0.0}, cfg);
    CHECK(p == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("late harvest cannot be moved earlier") {
    auto p = flat_power_allocation({0.0, 3600.0}, cfg);
    CHECK(p == std::vector<double>{0.0, 2.0});
  }
  SUBCASE("single slot spends everything") {
    auto p = flat_power_allocation({5400.0}, cfg);
    CHECK(p == std::vector<double>{3.0});
  }
  SUBCASE("all-zero series stays zero") {
    auto p = flat_power_allocation({0.0, 0.0, 0.0}, cfg);
    CHECK(p == std::vector<double>(3, 0.0));
  }
  SUBCASE("staircase harvest gives a staircase profile") {
    auto p = flat_power_allocation({1800.0, 3600.0, 7200.0}, cfg);
    CHECK(p == std::vector<double>{1.0, 2.0, 4.0});
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(flat_power_allocation({}, cfg), InvalidInputError);
    CHECK_THROWS_AS(flat_power_allocation({-1.0}, cfg), InvalidInputError);
    CHECK_THROWS_AS(
        flat_power_allocation({std::numeric_limits<double>::infinity()}, cfg),
        InvalidInputError);
  }
}

TEST_CASE("flat power equals the convex minorant of the cumulative harvest") {
  const SystemConfig cfg = testutil::make_config({78.0});
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const auto e = random_energies(rng, 48);
    const auto p = flat_power_allocation(e, cfg);
    const auto q = hull_power(e, cfg.slot_length_s);
    REQUIRE(p.size() == q.size());
    for (int i = 0; i < 48; ++i) {
      CHECK(rel_diff(p[i], q[i]) <= 1e-9);
    }
  }
}

TEST_CASE("flat power is nondecreasing, causal, spends everything, scales") {
  const SystemConfig cfg = testutil::make_config({78.0});
  const double T = cfg.slot_length_s;
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto e = random_energies(rng, 48);
    const auto p = flat_power_allocation(e, cfg);

    double cum_e = 0.0, cum_spend = 0.0, total = 0.0;
    for (double v : e) total += v;
    for (int i = 0; i < 48; ++i) {
      if (i > 0) CHECK(p[i] >= p[i - 1] - 1e-12 * std::max(1.0, p[i]));
      cum_e += e[i];
      cum_spend += p[i] * T;
      CHECK(cum_spend <= cum_e + 1e-9 * std::max(1.0, cum_e));
    }
    CHECK(rel_diff(cum_spend, total) <= 1e-9);

    // Scaling by a power of two must not change any branch decision, so
    // the scaled profile is bit-for-bit the original times the factor.
    for (double c : {2.0, 0.5}) {
      std::vector<double> ce(e);
      for (double& v : ce) v *= c;
      const auto pc = flat_power_allocation(ce, cfg);
      for (int i = 0; i < 48; ++i) CHECK(pc[i] == c * p[i]);
    }
  }
}

TEST_CASE("slot assignment rules") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0, 100.0}, 4);
  CumulativeBits cum(3);

  SUBCASE("first slot goes to the highest rate") {
    CHECK(assign_slot(1, {2.0, 1.0, 3.0}, cum, cfg) == 2);
  }
  SUBCASE("all-zero cumulative behaves like the first slot") {
    CHECK(assign_slot(5, {2.0, 1.0, 3.0}, cum, cfg) == 2);
  }
  SUBCASE("unserved gateways take priority, best channel first") {
    cum.add(0, 1e6);
    CHECK(assign_slot(2, {9.0, 1.0, 1.0}, cum, cfg) == 1);
    cum.add(1, 1e6);
    CHECK(assign_slot(3, {9.0, 9.0, 1.0}, cum, cfg) == 2);
  }
  SUBCASE("otherwise the largest bits-to-backlog ratio wins") {
    cum.add(0, 1000.0);
    cum.add(1, 2000.0);
    cum.add(2, 1000.0);
    // ratios: 4*T/1000, 10*T/2000, 4.9*T/1000
    CHECK(assign_slot(4, {4.0, 10.0, 4.9}, cum, cfg) == 1);
    CHECK(assign_slot(4, {4.0, 9.7, 4.9}, cum, cfg) == 2);
  }
  SUBCASE("ties break toward the larger gain then the lower index") {
    const SystemConfig twin = testutil::make_config({92.0, 92.0}, 4);
    CumulativeBits c2(2);
    CHECK(assign_slot(1, {5.0, 5.0}, c2, twin) == 0);
    c2.add(0, 100.0);
    c2.add(1, 100.0);
    CHECK(assign_slot(2, {5.0, 5.0}, c2, twin) == 0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(assign_slot(0, {1.0, 1.0, 1.0}, cum, cfg),
                    InvalidInputError);
    CHECK_THROWS_AS(assign_slot(1, {1.0, 1.0}, cum, cfg), InvalidInputError);
    CHECK_THROWS_AS(assign_slot(1, {1.0, -1.0, 1.0}, cum, cfg),
                    InvalidInputError);
    CHECK_THROWS_AS(cum.add(3, 1.0), InvalidInputError);
    CHECK_THROWS_AS(cum.add(0, -1.0), InvalidInputError);
  }
}

TEST_CASE("greedy assignment against exhaustive search on tiny frames") {
  // 3 slots, 2 gateways: enumerate all 8 whole-slot assignments over the
  // same flat-power profile.
  const SystemConfig cfg = testutil::make_config({78.0, 92.0}, 3);
  const double T = cfg.slot_length_s;

  const auto brute_best = [&](const std::vector<double>& p) {
    double best = -std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < 8; ++mask) {
      std::vector<double> bits(2, 0.0);
      for (int t = 0; t < 3; ++t) {
        const int g = (mask >> t) & 1;
        bits[g] += T * rate_bits_per_sec(p[t], cfg.gateways[g], cfg);
      }
      if (bits[0] > 0.0 && bits[1] > 0.0) {
        best = std::max(best, log_utility(bits));
      }
    }
    return best;
  };

  SUBCASE("constant rates: the greedy pick is exhaustively optimal") {
    const auto energies =
        EnergySeries::from_energies(std::vector<double>(3, 3600.0));
    const Schedule sched = ptf_offline(energies, cfg);
    CHECK(frame_utility(sched, cfg) ==
          doctest::Approx(brute_best(sched.allocation.power_w))
              .epsilon(1e-12));
  }
  SUBCASE("rising rates: the documented rule fires and stays within the optimum") {
    const auto energies =
        EnergySeries::from_energies({1800.0, 3600.0, 7200.0});
    const Schedule sched = ptf_offline(energies, cfg);
    // Slot 1 by instantaneous rate, slot 2 by unserved priority, slot 3 by
    // the bits-to-backlog ratio, which lands on the strong channel here.
    CHECK(sched.assigned_gateway == std::vector<int>{0, 1, 0});
    CHECK(frame_utility(sched, cfg) <=
          brute_best(sched.allocation.power_w) + 1e-12);
  }
}

TEST_CASE("offline schedule is whole-slot, feasible, and spends the harvest") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0, 100.0}, 48);
  std::mt19937_64 rng(11);
  const auto e = random_energies(rng, 48);
  const auto energies = EnergySeries::from_energies(e);
  const Schedule sched = ptf_offline(energies, cfg);

  auto report = check_feasibility(sched.allocation, energies, cfg, 1e-9);
  CHECK(report.feasible());

  double total_e = 0.0, total_spend = 0.0;
  for (double v : e) total_e += v;
  for (double p : sched.allocation.power_w) total_spend += p * cfg.slot_length_s;
  CHECK(rel_diff(total_spend, total_e) <= 1e-9);

  for (int t = 0; t < 48; ++t) {
    const int g = sched.assigned_gateway[t];
    CHECK(g >= 0);
    CHECK(g < 3);
    for (int other = 0; other < 3; ++other) {
      CHECK(sched.allocation.time_s[t][other] ==
            (other == g ? cfg.slot_length_s : 0.0));
    }
  }

  // The stored totals match the continuous-time accounting.
  const auto recomputed = bits_per_gateway(sched.allocation, cfg);
  for (int g = 0; g < 3; ++g) {
    CHECK(rel_diff(sched.bits_per_gateway[g], recomputed[g]) <= 1e-9);
  }
  CHECK(sched.total_bits() > 0.0);
}

TEST_CASE("offline schedule with a single gateway gives it every slot") {
  const SystemConfig cfg = testutil::make_config({92.0}, 6);
  const auto energies =
      EnergySeries::from_energies({0.0, 9000.0, 0.0, 1800.0, 3600.0, 0.0});
  const Schedule sched = ptf_offline(energies, cfg);
  for (int t = 0; t < 6; ++t) CHECK(sched.assigned_gateway[t] == 0);
  CHECK(check_feasibility(sched.allocation, energies, cfg).feasible());
  CHECK(sched.bits_per_gateway[0] == doctest::Approx(sched.total_bits()));
}

TEST_CASE("offline schedule on a zero harvest delivers zero bits") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0}, 4);
  const auto energies = EnergySeries::from_energies({0.0, 0.0, 0.0, 0.0});
  const Schedule sched = ptf_offline(energies, cfg);
  for (double p : sched.allocation.power_w) CHECK(p == 0.0);
  for (double b : sched.bits_per_gateway) CHECK(b == 0.0);
  CHECK_THROWS_AS(frame_utility(sched, cfg), UtilityUndefinedError);
}

TEST_CASE("offline schedule rejects a wrong-length series") {
  const SystemConfig cfg = testutil::make_config({78.0}, 4);
  CHECK_THROWS_AS(ptf_offline(EnergySeries::from_energies({1.0, 2.0}), cfg),
                  InvalidInputError);
  CHECK_THROWS_AS(sg_tdma(EnergySeries::from_energies({1.0, 2.0}), cfg),
                  InvalidInputError);
}

TEST_CASE("spend-what-you-get baseline shares every slot equally") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0, 100.0}, 3);
  const double T = cfg.slot_length_s;
  const auto energies = EnergySeries::from_energies({3600.0, 0.0, 3600.0});
  const Schedule sched = sg_tdma(energies, cfg);

  CHECK(sched.allocation.power_w == std::vector<double>{2.0, 0.0, 2.0});
  for (int t = 0; t < 3; ++t) {
    CHECK(sched.assigned_gateway[t] == -1);
    for (int g = 0; g < 3; ++g) {
      CHECK(sched.allocation.time_s[t][g] == T / 3.0);
    }
  }
  for (int g = 0; g < 3; ++g) {
    const double expect =
        2.0 * (T / 3.0) * rate_bits_per_sec(2.0, cfg.gateways[g], cfg);
    CHECK(rel_diff(sched.bits_per_gateway[g], expect) <= 1e-12);
  }
  CHECK(check_feasibility(sched.allocation, energies, cfg).feasible());
}

TEST_CASE("baseline equals the flat schedule when one gateway sees constant harvest") {
  const SystemConfig cfg = testutil::make_config({92.0}, 8);
  const auto energies = EnergySeries::from_energies(std::vector<double>(8, 5400.0));
  const Schedule a = ptf_offline(energies, cfg);
  const Schedule b = sg_tdma(energies, cfg);
  CHECK(rel_diff(a.bits_per_gateway[0], b.bits_per_gateway[0]) <= 1e-12);
}

TEST_CASE("predicted series layout, clamping, and validation") {
  auto s = build_predicted_series(8000.0, 4000.0, {3000.0, 2000.0}, 4000.0);
  CHECK(s.carryover_j == 4000.0);
  REQUIRE(s.entries.size() == 4);
  CHECK(s.entries.entries[0].energy_j == 12000.0);
  CHECK(s.entries.entries[0].provenance == Provenance::Measured);
  CHECK(s.entries.entries[1].energy_j == 4000.0);
  CHECK(s.entries.entries[1].provenance == Provenance::KSEP);
  CHECK(s.entries.entries[2].energy_j == 3000.0);
  CHECK(s.entries.entries[2].provenance == Provenance::SSEP);
  CHECK(s.entries.entries[3].energy_j == 2000.0);

  auto clamped = build_predicted_series(10.0, -5.0, {-3.0}, 0.0);
  CHECK(clamped.entries.entries[1].energy_j == 0.0);
  CHECK(clamped.entries.entries[2].energy_j == 0.0);

  CHECK_THROWS_AS(build_predicted_series(-1.0, 0.0, {}, 0.0),
                  InvalidInputError);
  CHECK_THROWS_AS(
      build_predicted_series(1.0, std::numeric_limits<double>::quiet_NaN(),
                             {}, 0.0),
      InvalidInputError);
  CHECK_THROWS_AS(build_predicted_series(1.0, 0.0, {}, -1.0),
                  InvalidInputError);
  CHECK_THROWS_AS(
      build_predicted_series(1.0, 0.0,
                             {std::numeric_limits<double>::infinity()}, 0.0),
      InvalidInputError);
}

TEST_CASE("online run with perfect foresight reproduces the offline schedule") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0, 100.0});
  const SubHourSeries timeline = diurnal_timeline(48 * 4);
  const PredictorModel model{WeightSet{0.5, 0.3, 0.0}, 1e6, 100.0};

  PtfonOptions opt;
  opt.predictor = PredictorKind::Oracle;
  opt.horizon = PlanHorizon::FrameClipped;
  PtfonResult run = ptfon_run(timeline, 96, 2, cfg, model, opt);
  REQUIRE(run.frames.size() == 2);

  for (int f = 0; f < 2; ++f) {
    const PtfonFrame& frame = run.frames[f];
    const EnergySeries real =
        frame_energies(timeline, 96 + 48 * f, cfg.slots_per_frame);
    const Schedule off = ptf_offline(real, cfg);

    CHECK(frame.schedule.assigned_gateway == off.assigned_gateway);
    for (int t = 0; t < 48; ++t) {
      CHECK(rel_diff(frame.schedule.allocation.power_w[t],
                     off.allocation.power_w[t]) <= 1e-12);
    }
    for (int g = 0; g < 3; ++g) {
      CHECK(rel_diff(frame.schedule.bits_per_gateway[g],
                     off.bits_per_gateway[g]) <= 1e-9);
    }
    CHECK(frame.cap_events == 0);
    // A clipped horizon leaves nothing on the table at the frame boundary.
    CHECK(frame.residual_end_j <= 1e-6);
  }
}

TEST_CASE("online run with the filter stays causal and accounts for carry") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0, 100.0});
  const SubHourSeries timeline = diurnal_timeline(48 * 5);
  FitReport fit = fit_weights(timeline, WeightSet{}, FitMethod::LeastSquares);
  const PredictorModel model = model_from_fit(fit);

  for (PlanHorizon horizon : {PlanHorizon::FrameClipped, PlanHorizon::Sliding}) {
    PtfonOptions opt;
    opt.horizon = horizon;
    PtfonResult run = ptfon_run(timeline, 96, 3, cfg, model, opt);
    REQUIRE(run.frames.size() == 3);

    double carry_in = 0.0;
    for (const PtfonFrame& frame : run.frames) {
      CHECK(static_cast<int>(frame.real_j.size()) == 48);
      CHECK(static_cast<int>(frame.ksep_pred_j.size()) == 47);
      CHECK(static_cast<int>(frame.ssep_pred_j.size()) == 48);
      CHECK(frame.residual_end_j >= 0.0);

      // Committed spending must be causal against what was really
      // available: the measured energies plus the carried residual.
      std::vector<double> avail = frame.real_j;
      avail[0] += carry_in;
      auto report = check_feasibility(frame.schedule.allocation,
                                      EnergySeries::from_energies(avail), cfg,
                                      1e-9);
      CHECK(report.feasible());

      // The baseline prediction is the two-day average of the timeline.
      const auto z = timeline.energies_j();
      for (int t = 0; t < 48; ++t) {
        const int idx = frame.frame_start_index + t;
        CHECK(frame.ssep_pred_j[t] ==
              ssep_predict(z[idx - 48], z[idx - 96]));
        CHECK(frame.real_j[t] == z[idx]);
      }
      carry_in = frame.residual_end_j;
    }
  }
}

TEST_CASE("online run history and length validation") {
  const SystemConfig cfg = testutil::make_config({78.0, 92.0});
  const SubHourSeries timeline = diurnal_timeline(48 * 4);
  const PredictorModel model{WeightSet{0.5, 0.3, 0.0}, 1e6, 100.0};

  CHECK_THROWS_AS(ptfon_run(timeline, 95, 1, cfg, model),
                  InsufficientHistoryError);
  CHECK_THROWS_AS(ptfon_run(timeline, 96, 3, cfg, model),
                  InsufficientHistoryError);
  CHECK_THROWS_AS(ptfon_run(timeline, 96, 0, cfg, model), InvalidInputError);

  PtfonOptions oracle_sliding;
  oracle_sliding.predictor = PredictorKind::Oracle;
  oracle_sliding.horizon = PlanHorizon::Sliding;
  CHECK_THROWS_AS(ptfon_run(timeline, 96, 2, cfg, model, oracle_sliding),
                  InvalidInputError);
  const SubHourSeries longer = diurnal_timeline(48 * 4 + 47);
  CHECK_NOTHROW(ptfon_run(longer, 96, 2, cfg, model, oracle_sliding));
}

TEST_CASE("schedule CSV layout") {
  testutil::TempDir tmp;
  const SystemConfig cfg = testutil::make_config({78.0, 92.0}, 3);
  const auto energies = EnergySeries::from_energies({1800.0, 3600.0, 7200.0});

  const std::string path = tmp.file("sched.csv");
  save_schedule_csv(ptf_offline(energies, cfg), cfg, path);

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "slot,power_w,gateway,bits");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream ss(line);
    std::string slot, power, gateway, bits;
    REQUIRE(std::getline(ss, slot, ','));
    REQUIRE(std::getline(ss, power, ','));
    REQUIRE(std::getline(ss, gateway, ','));
    REQUIRE(std::getline(ss, bits, ','));
    CHECK(std::stoi(slot) == rows);
    CHECK(std::stod(power) >= 0.0);
    const int g = std::stoi(gateway);
    CHECK(g >= 0);
    CHECK(g < 2);
    CHECK(std::stod(bits) >= 0.0);
  }
  CHECK(rows == 3);

  // Shared slots are marked with gateway -1.
  const std::string shared = tmp.file("shared.csv");
  save_schedule_csv(sg_tdma(energies, cfg), cfg, shared);
  std::ifstream in2(shared);
  std::getline(in2, line);
  while (std::getline(in2, line)) {
    std::istringstream ss(line);
    std::string slot, power, gateway;
    std::getline(ss, slot, ',');
    std::getline(ss, power, ',');
    std::getline(ss, gateway, ',');
    CHECK(gateway == "-1");
  }
}

}  // TEST_SUITE("scheduler")
