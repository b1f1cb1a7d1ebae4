#include "solarsched/scheduler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace solarsched {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void validate_energies(const std::vector<double>& energy_j) {
  if (energy_j.empty()) {
    throw InvalidInputError("energy series must not be empty");
  }
  for (double e : energy_j) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidInputError("energies must be finite and nonnegative");
    }
  }
}

std::vector<double> slot_rates(double power_w, const SystemConfig& cfg) {
  std::vector<double> rates(cfg.num_gateways());
  for (int g = 0; g < cfg.num_gateways(); ++g) {
    rates[g] = rate_bits_per_sec(power_w, cfg.gateways[g], cfg);
  }
  return rates;
}

}  // namespace

std::vector<double> flat_power_allocation(const std::vector<double>& energy_j,
                                          const SystemConfig& cfg) {
  validate_energies(energy_j);
  const int k = static_cast<int>(energy_j.size());
  const double T = cfg.slot_length_s;

  std::vector<double> cum(k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += energy_j[i];
    cum[i] = acc;
  }

  std::vector<double> p(k);
  int s = 0;
  double base = 0.0;  // energy already spent when the segment starts
  while (s < k) {
    int best = s;
    double best_num = cum[s] - base;
    for (int j = s + 1; j < k; ++j) {
      const double num = cum[j] - base;
      // num/(j-s+1) vs best_num/(best-s+1), compared without dividing
      const double lhs = num * (best - s + 1);
      const double rhs = best_num * (j - s + 1);
      if (lhs < rhs || (lhs == rhs && j > best)) {
        best = j;
        best_num = num;
      }
    }
    const double slope = best_num / ((best - s + 1) * T);
    for (int i = s; i <= best; ++i) p[i] = slope;
    base = cum[best];
    s = best + 1;
  }
  return p;
}

void CumulativeBits::add(int gateway, double delivered_bits) {
  if (gateway < 0 || gateway >= static_cast<int>(bits.size())) {
    throw InvalidInputError("gateway index out of range");
  }
  if (!std::isfinite(delivered_bits) || delivered_bits < 0.0) {
    throw InvalidInputError("delivered bits must be finite and nonnegative");
  }
  bits[gateway] += delivered_bits;
}

bool CumulativeBits::all_zero() const {
  for (double b : bits) {
    if (b != 0.0) return false;
  }
  return true;
}

int assign_slot(int slot_1based, const std::vector<double>& rates_bps,
                const CumulativeBits& cumulative, const SystemConfig& cfg) {
  const int n = cfg.num_gateways();
  if (slot_1based < 1) throw InvalidInputError("slot numbers start at 1");
  if (static_cast<int>(rates_bps.size()) != n ||
      static_cast<int>(cumulative.bits.size()) != n) {
    throw InvalidInputError("rate/cumulative vectors must match gateway count");
  }
  for (double r : rates_bps) {
    if (!std::isfinite(r) || r < 0.0) {
      throw InvalidInputError("rates must be finite and nonnegative");
    }
  }

  // better(a, b): should a replace incumbent b under score-then-tie order?
  // Scores within 1e-12 relative count as tied: flat power segments make the
  // ratio scores of already-served gateways coincide by construction, and the
  // gain/index tie-breaks must decide those slots, not last-ulp noise from
  // whoever computed the rates.
  const auto better = [&](int a, int b, double score_a, double score_b) {
    const double band = 1e-12 * std::max(score_a, score_b);
    if (std::abs(score_a - score_b) > band) return score_a > score_b;
    if (cfg.gateways[a].gain != cfg.gateways[b].gain) {
      return cfg.gateways[a].gain > cfg.gateways[b].gain;
    }
    return a < b;
  };

  if (slot_1based == 1 || cumulative.all_zero()) {
    int pick = 0;
    for (int g = 1; g < n; ++g) {
      if (better(g, pick, rates_bps[g], rates_bps[pick])) pick = g;
    }
    return pick;
  }

  // Unserved gateways take absolute priority (their ratio is +infinity).
  int pick = -1;
  for (int g = 0; g < n; ++g) {
    if (cumulative.bits[g] == 0.0) {
      if (pick == -1 || better(g, pick, 0.0, 0.0)) pick = g;
    }
  }
  if (pick != -1) return pick;

  pick = 0;
  double pick_beta = rates_bps[0] * cfg.slot_length_s / cumulative.bits[0];
  for (int g = 1; g < n; ++g) {
    const double beta = rates_bps[g] * cfg.slot_length_s / cumulative.bits[g];
    if (better(g, pick, beta, pick_beta)) {
      pick = g;
      pick_beta = beta;
    }
  }
  return pick;
}

Schedule ptf_offline(const EnergySeries& energies, const SystemConfig& cfg) {
  cfg.validate();
  const int k = cfg.slots_per_frame;
  const int n = cfg.num_gateways();
  if (energies.size() != k) {
    throw InvalidInputError("energy series length must equal slots_per_frame");
  }
  const double T = cfg.slot_length_s;

  Schedule sched;
  sched.allocation.power_w = flat_power_allocation(energies.energies(), cfg);
  sched.allocation.time_s.assign(k, std::vector<double>(n, 0.0));
  sched.assigned_gateway.assign(k, -1);

  CumulativeBits cum(n);
  for (int t = 0; t < k; ++t) {
    const auto rates = slot_rates(sched.allocation.power_w[t], cfg);
    const int g = assign_slot(t + 1, rates, cum, cfg);
    cum.add(g, rates[g] * T);
    sched.allocation.time_s[t][g] = T;
    sched.assigned_gateway[t] = g;
  }
  sched.bits_per_gateway = cum.bits;
  return sched;
}

Schedule sg_tdma(const EnergySeries& energies, const SystemConfig& cfg) {
  cfg.validate();
  const int k = cfg.slots_per_frame;
  const int n = cfg.num_gateways();
  if (energies.size() != k) {
    throw InvalidInputError("energy series length must equal slots_per_frame");
  }
  const double T = cfg.slot_length_s;
  const double share = T / n;

  Schedule sched;
  sched.allocation.power_w.resize(k);
  sched.allocation.time_s.assign(k, std::vector<double>(n, share));
  sched.assigned_gateway.assign(k, -1);
  sched.bits_per_gateway.assign(n, 0.0);
  for (int t = 0; t < k; ++t) {
    const double p = energies.entries[t].energy_j / T;
    sched.allocation.power_w[t] = p;
    const auto rates = slot_rates(p, cfg);
    for (int g = 0; g < n; ++g) {
      sched.bits_per_gateway[g] += share * rates[g];
    }
  }
  return sched;
}

PredictedHarvestSeries build_predicted_series(
    double measured_now_j, double ksep_next_j,
    const std::vector<double>& ssep_rest_j, double residual_j) {
  if (!std::isfinite(measured_now_j) || measured_now_j < 0.0) {
    throw InvalidInputError("measured energy must be finite and nonnegative");
  }
  if (!std::isfinite(ksep_next_j)) {
    throw InvalidInputError("one-step prediction must be finite");
  }
  if (!std::isfinite(residual_j) || residual_j < 0.0) {
    throw InvalidInputError(
        "negative residual energy: causality accounting is broken upstream");
  }

  PredictedHarvestSeries series;
  series.carryover_j = residual_j;
  series.entries.entries.push_back(
      {measured_now_j + residual_j, Provenance::Measured});
  series.entries.entries.push_back(
      {std::max(0.0, ksep_next_j), Provenance::KSEP});
  for (double e : ssep_rest_j) {
    if (!std::isfinite(e)) {
      throw InvalidInputError("baseline predictions must be finite");
    }
    series.entries.entries.push_back({std::max(0.0, e), Provenance::SSEP});
  }
  return series;
}

PtfonResult ptfon_run(const SubHourSeries& timeline, int first_frame_start,
                      int frame_count, const SystemConfig& cfg,
                      const PredictorModel& model,
                      const PtfonOptions& options) {
  cfg.validate();
  const int k = cfg.slots_per_frame;
  const int n = cfg.num_gateways();
  const double T = cfg.slot_length_s;
  if (frame_count < 1) throw InvalidInputError("frame_count must be positive");
  if (first_frame_start < 2 * k) {
    throw InsufficientHistoryError(
        "online scheduling needs two full measured days before the first "
        "frame");
  }
  const int needed = first_frame_start + frame_count * k;
  if (timeline.size() < needed) {
    throw InsufficientHistoryError(
        "trace covers " + std::to_string(timeline.size()) +
        " sub-hours but the requested frames need " + std::to_string(needed));
  }
  const bool oracle = options.predictor == PredictorKind::Oracle;
  const bool sliding = options.horizon == PlanHorizon::Sliding;
  if (oracle && sliding && timeline.size() < needed + k - 1) {
    throw InvalidInputError(
        "oracle predictions over a sliding horizon need the trace to cover "
        "one slot short of a frame beyond the last scheduled frame");
  }

  const std::vector<double> z = timeline.energies_j();
  const std::vector<double> y = timeline.irradiations();

  PtfonResult result;
  double carry = 0.0;  // unspent energy, carried slot to slot and frame to frame
  for (int f = 0; f < frame_count; ++f) {
    const int fs = first_frame_start + f * k;
    PtfonFrame frame;
    frame.frame_start_index = fs;
    frame.real_j.assign(z.begin() + fs, z.begin() + fs + k);
    frame.ksep_pred_j.assign(k - 1, 0.0);
    frame.ssep_pred_j.assign(k, 0.0);

    KalmanState filter = KalmanState::from_prior_day(
        std::vector<double>(z.begin() + (fs - k), z.begin() + fs),
        model.weights, model.sigma_w_sq, model.sigma_v_sq);

    Schedule sched;
    sched.allocation.power_w.assign(k, 0.0);
    sched.allocation.time_s.assign(k, std::vector<double>(n, 0.0));
    sched.assigned_gateway.assign(k, -1);
    CumulativeBits cum(n);

    for (int t = 0; t < k; ++t) {
      const int abs_idx = fs + t;
      const double measured = z[abs_idx];
      frame.ssep_pred_j[t] = ssep_predict(z[abs_idx - k], z[abs_idx - 2 * k]);

      double next_pred;
      if (oracle) {
        next_pred = abs_idx + 1 < static_cast<int>(z.size()) ? z[abs_idx + 1]
                                                             : 0.0;
      } else {
        KsepStepResult step = ksep_step(filter, y[abs_idx], measured);
        filter = std::move(step.state);
        next_pred = step.predicted_next_energy_j;
      }
      if (t + 1 < k) frame.ksep_pred_j[t] = next_pred;

      const int horizon = sliding ? k : k - t;
      const double avail = carry + measured;
      std::vector<double> plan;
      if (horizon == 1) {
        plan.assign(1, avail / T);
      } else {
        std::vector<double> rest;
        rest.reserve(horizon - 2);
        for (int h = 2; h < horizon; ++h) {
          const int idx = abs_idx + h;
          rest.push_back(oracle ? z[idx]
                                : ssep_predict(z[idx - k], z[idx - 2 * k]));
        }
        PredictedHarvestSeries pred =
            build_predicted_series(measured, next_pred, rest, carry);
        plan = flat_power_allocation(pred.entries.energies(), cfg);
      }

      double p = plan.front();
      double spend = p * T;
      if (spend > avail) {
        // Prediction overshoot guard. The plan's first slot can never want
        // more than entry 1 = avail, so only rounding lands here; count it
        // as a cap event only when the excess is material.
        if (spend - avail > 1e-9 * std::max(avail, 1.0)) ++frame.cap_events;
        p = avail / T;
        spend = std::min(p * T, avail);
      }

      const auto rates = slot_rates(p, cfg);
      const int g = assign_slot(t + 1, rates, cum, cfg);
      cum.add(g, rates[g] * T);
      sched.allocation.power_w[t] = p;
      sched.allocation.time_s[t][g] = T;
      sched.assigned_gateway[t] = g;

      const double leftover = avail - spend;
      if (leftover < -1e-6 * std::max(avail, 1.0)) {
        throw Error("internal causality accounting failure in online run");
      }
      carry = std::max(0.0, leftover);
    }

    sched.bits_per_gateway = cum.bits;
    frame.schedule = std::move(sched);
    frame.residual_end_j = carry;
    result.frames.push_back(std::move(frame));
  }
  return result;
}

void save_schedule_csv(const Schedule& schedule, const SystemConfig& cfg,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write schedule CSV: " + path);
  const int k = schedule.allocation.num_slots();
  out << "slot,power_w,gateway,bits\n";
  for (int t = 0; t < k; ++t) {
    double slot_bits = 0.0;
    for (int g = 0; g < cfg.num_gateways(); ++g) {
      if (schedule.allocation.time_s[t][g] != 0.0) {
        slot_bits +=
            schedule.allocation.time_s[t][g] *
            rate_bits_per_sec(schedule.allocation.power_w[t], cfg.gateways[g],
                              cfg);
      }
    }
    out << (t + 1) << "," << fmt_double(schedule.allocation.power_w[t]) << ","
        << schedule.assigned_gateway[t] << "," << fmt_double(slot_bits)
        << "\n";
  }
}

}  // namespace solarsched
