#include "solarsched/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace solarsched {

GatewayChannel GatewayChannel::from_path_loss(int id, double path_loss_db) {
  if (!std::isfinite(path_loss_db) || path_loss_db < 0.0) {
    throw InvalidInputError("path loss must be a finite nonnegative dB value");
  }
  GatewayChannel gw;
  gw.id = id;
  gw.path_loss_db = path_loss_db;
  gw.gain = std::pow(10.0, -path_loss_db / 10.0);
  return gw;
}

void SystemConfig::validate() const {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw InvalidInputError("bandwidth_hz must be positive");
  }
  if (!(noise_density_w_per_hz > 0.0) || !std::isfinite(noise_density_w_per_hz)) {
    throw InvalidInputError("noise_density must be positive");
  }
  if (!(slot_length_s > 0.0) || !std::isfinite(slot_length_s)) {
    throw InvalidInputError("slot_length_s must be positive");
  }
  if (slots_per_frame < 1) {
    throw InvalidInputError("slots_per_frame must be at least 1");
  }
  if (!(epsilon_time_s >= 0.0) || epsilon_time_s > slot_length_s) {
    throw InvalidInputError("epsilon_time_s must be in [0, slot_length_s]");
  }
  if (gateways.empty()) {
    throw InvalidInputError("at least one gateway is required");
  }
  for (const auto& gw : gateways) {
    if (!(gw.gain > 0.0) || gw.gain > 1.0 || !std::isfinite(gw.gain)) {
      throw InvalidInputError("gateway gain must be in (0, 1]");
    }
    double expected = std::pow(10.0, -gw.path_loss_db / 10.0);
    if (std::abs(gw.gain - expected) > 1e-12 * expected) {
      throw InvalidInputError("gateway gain inconsistent with its path loss");
    }
  }
}

EnergySeries EnergySeries::from_energies(const std::vector<double>& energy_j,
                                         Provenance provenance,
                                         std::int64_t origin_epoch_s) {
  EnergySeries s;
  s.origin_epoch_s = origin_epoch_s;
  s.entries.reserve(energy_j.size());
  for (double e : energy_j) {
    if (!std::isfinite(e) || e < 0.0) {
      throw InvalidInputError("harvested energy must be finite and nonnegative");
    }
    s.entries.push_back({e, provenance});
  }
  return s;
}

std::vector<double> EnergySeries::energies() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.energy_j);
  return out;
}

double Schedule::total_bits() const {
  return std::accumulate(bits_per_gateway.begin(), bits_per_gateway.end(), 0.0);
}

double rate_bits_per_sec(double power_w, const GatewayChannel& gw,
                         const SystemConfig& cfg) {
  if (!std::isfinite(power_w) || power_w < 0.0) {
    throw InvalidInputError("transmit power must be finite and nonnegative");
  }
  double snr = power_w * gw.gain / (cfg.noise_density_w_per_hz * cfg.bandwidth_hz);
  return cfg.bandwidth_hz * std::log2(1.0 + snr);
}

std::vector<double> bits_per_gateway(const Allocation& alloc,
                                     const SystemConfig& cfg) {
  const int k = alloc.num_slots();
  const int n = cfg.num_gateways();
  if (static_cast<int>(alloc.time_s.size()) != k) {
    throw InvalidInputError("allocation time matrix has wrong slot count");
  }
  std::vector<double> bits(n, 0.0);
  for (int t = 0; t < k; ++t) {
    if (static_cast<int>(alloc.time_s[t].size()) != n) {
      throw InvalidInputError("allocation time matrix has wrong gateway count");
    }
    for (int g = 0; g < n; ++g) {
      if (alloc.time_s[t][g] != 0.0) {
        bits[g] += alloc.time_s[t][g] *
                   rate_bits_per_sec(alloc.power_w[t], cfg.gateways[g], cfg);
      }
    }
  }
  return bits;
}

double log_utility(const std::vector<double>& bits) {
  double u = 0.0;
  for (double b : bits) {
    if (!(b > 0.0)) {
      throw UtilityUndefinedError(
          "utility undefined: a gateway received zero bits");
    }
    u += std::log2(b);
  }
  return u;
}

double frame_utility(const Schedule& sched, const SystemConfig& cfg) {
  if (static_cast<int>(sched.bits_per_gateway.size()) != cfg.num_gateways()) {
    throw InvalidInputError("schedule gateway count does not match config");
  }
  return log_utility(sched.bits_per_gateway);
}

std::string Violation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case ViolationKind::NegativePower:
      os << "negative power in slot " << slot;
      break;
    case ViolationKind::NegativeTime:
      os << "negative service time in slot " << slot << " gateway " << gateway;
      break;
    case ViolationKind::SlotTimeSum:
      os << "slot " << slot << " service times do not sum to the slot length";
      break;
    case ViolationKind::MinTimeShare:
      os << "gateway " << gateway << " falls short of the minimum time share";
      break;
    case ViolationKind::EnergyCausality:
      os << "cumulative spend exceeds cumulative harvest at slot " << slot;
      break;
  }
  os << " (excess " << amount << ", relative " << relative << ")";
  return os.str();
}

double FeasibilityReport::max_relative_violation() const {
  double m = 0.0;
  for (const auto& v : violations) m = std::max(m, v.relative);
  return m;
}

FeasibilityReport check_feasibility(const Allocation& alloc,
                                    const EnergySeries& energies,
                                    const SystemConfig& cfg,
                                    double tolerance_rel) {
  const int k = alloc.num_slots();
  const int n = cfg.num_gateways();
  if (k != cfg.slots_per_frame) {
    throw InvalidInputError("allocation slot count does not match config");
  }
  if (energies.size() != k) {
    throw InvalidInputError("energy series length does not match slot count");
  }
  if (static_cast<int>(alloc.time_s.size()) != k) {
    throw InvalidInputError("allocation time matrix has wrong slot count");
  }
  for (int t = 0; t < k; ++t) {
    if (static_cast<int>(alloc.time_s[t].size()) != n) {
      throw InvalidInputError("allocation time matrix has wrong gateway count");
    }
  }

  FeasibilityReport report;
  const double T = cfg.slot_length_s;
  const double time_tol = tolerance_rel * T;

  double total_harvest = 0.0;
  for (const auto& e : energies.entries) total_harvest += e.energy_j;
  const double energy_tol = tolerance_rel * std::max(total_harvest, 1.0);

  double max_power = 0.0;
  for (double p : alloc.power_w) max_power = std::max(max_power, p);
  const double power_tol = tolerance_rel * std::max(max_power, 1.0);

  for (int t = 0; t < k; ++t) {
    if (alloc.power_w[t] < -power_tol) {
      report.violations.push_back({ViolationKind::NegativePower, t, -1,
                                   -alloc.power_w[t],
                                   -alloc.power_w[t] / std::max(max_power, 1.0)});
    }
    double slot_sum = 0.0;
    for (int g = 0; g < n; ++g) {
      double tau = alloc.time_s[t][g];
      if (tau < -time_tol) {
        report.violations.push_back(
            {ViolationKind::NegativeTime, t, g, -tau, -tau / T});
      }
      slot_sum += tau;
    }
    double excess = std::abs(slot_sum - T);
    if (excess > time_tol) {
      report.violations.push_back(
          {ViolationKind::SlotTimeSum, t, -1, excess, excess / T});
    }
  }

  for (int g = 0; g < n; ++g) {
    double total = 0.0;
    for (int t = 0; t < k; ++t) total += alloc.time_s[t][g];
    double shortfall = cfg.epsilon_time_s - total;
    if (shortfall > time_tol) {
      report.violations.push_back(
          {ViolationKind::MinTimeShare, -1, g, shortfall, shortfall / T});
    }
  }

  double cum_spend = 0.0;
  double cum_harvest = 0.0;
  for (int t = 0; t < k; ++t) {
    cum_spend += alloc.power_w[t] * T;
    cum_harvest += energies.entries[t].energy_j;
    double excess = cum_spend - cum_harvest;
    if (excess > energy_tol) {
      report.violations.push_back(
          {ViolationKind::EnergyCausality, t, -1, excess,
           excess / std::max(total_harvest, 1.0)});
    }
  }
  return report;
}

}  // namespace solarsched
