#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "solarsched/errors.hpp"

namespace solarsched {

// Downlink channel of one gateway. Gains are linear power ratios derived
// from a path loss in dB; both are kept so configs stay readable.
struct GatewayChannel {
  int id = 0;                // 0-based gateway index
  double path_loss_db = 0.0;
  double gain = 1.0;         // 10^(-path_loss_db/10), in (0, 1]

  static GatewayChannel from_path_loss(int id, double path_loss_db);
};

// Static system parameters. SI units throughout: Hz, W, W/Hz, seconds.
struct SystemConfig {
  double bandwidth_hz = 1e7;
  double noise_density_w_per_hz = 1e-19;
  double slot_length_s = 1800.0;
  int slots_per_frame = 48;
  double epsilon_time_s = 1e-9;  // minimum per-frame service time per gateway
  std::vector<GatewayChannel> gateways;

  int num_gateways() const { return static_cast<int>(gateways.size()); }
  double frame_length_s() const { return slot_length_s * slots_per_frame; }
  // Throws InvalidInputError when any field is out of range.
  void validate() const;
};

// Where an energy value came from. Measured values are ground truth;
// the other two are predictor outputs used by the online scheduler.
enum class Provenance { Measured, KSEP, SSEP };

struct EnergyEntry {
  double energy_j = 0.0;
  Provenance provenance = Provenance::Measured;
};

// Per-slot harvested energy over one frame, plus the epoch second of the
// frame's first slot (0 when the origin is synthetic/unknown).
struct EnergySeries {
  std::int64_t origin_epoch_s = 0;
  std::vector<EnergyEntry> entries;

  static EnergySeries from_energies(const std::vector<double>& energy_j,
                                    Provenance provenance = Provenance::Measured,
                                    std::int64_t origin_epoch_s = 0);
  std::vector<double> energies() const;
  int size() const { return static_cast<int>(entries.size()); }
};

// A full frame decision: per-slot transmit power and per-slot service time
// for every gateway. time_s[t][n] is the time slice of gateway n in slot t.
struct Allocation {
  std::vector<double> power_w;               // length K
  std::vector<std::vector<double>> time_s;   // K x N

  int num_slots() const { return static_cast<int>(power_w.size()); }
  int num_gateways() const {
    return time_s.empty() ? 0 : static_cast<int>(time_s.front().size());
  }
};

// Allocation plus the whole-slot assignment view used by the greedy
// scheduler. assigned_gateway[t] is -1 when slot t is shared (TDMA).
struct Schedule {
  Allocation allocation;
  std::vector<int> assigned_gateway;     // length K, -1 = shared slot
  std::vector<double> bits_per_gateway;  // length N

  double total_bits() const;
};

// Shannon AWGN rate of one gateway at transmit power p: W*log2(1 + p*g/(N0*W)).
// Throws InvalidInputError for negative or non-finite power.
double rate_bits_per_sec(double power_w, const GatewayChannel& gw,
                         const SystemConfig& cfg);

// Per-gateway bit totals implied by an allocation: R_n = sum_t time[t][n] *
// rate(p_t, g_n). This is the continuous-time view; Schedule::bits_per_gateway
// must agree with it.
std::vector<double> bits_per_gateway(const Allocation& alloc,
                                     const SystemConfig& cfg);

// Proportional-fair frame utility: sum_n log2(bits_n).
// Throws UtilityUndefinedError when some gateway has zero bits.
double frame_utility(const Schedule& sched, const SystemConfig& cfg);
double log_utility(const std::vector<double>& bits);

enum class ViolationKind {
  NegativePower,
  NegativeTime,
  SlotTimeSum,      // per-slot service times must sum to the slot length
  MinTimeShare,     // per-gateway total service time must reach epsilon
  EnergyCausality,  // cumulative spend must not exceed cumulative harvest
};

struct Violation {
  ViolationKind kind;
  int slot = -1;      // -1 when not slot-specific
  int gateway = -1;   // -1 when not gateway-specific
  double amount = 0;  // raw excess in natural units (s, W, or J)
  double relative = 0;  // excess normalized by the constraint's scale
  std::string describe() const;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
  double max_relative_violation() const;
};

// Checks an allocation against the frame constraints:
// nonnegative power/time, per-slot time sums equal to the slot length,
// per-gateway minimum time share, and cumulative energy causality against
// the given harvest series. tolerance_rel scales every check (times against
// the slot length, energies against the total harvest).
// Throws InvalidInputError on dimension mismatches.
FeasibilityReport check_feasibility(const Allocation& alloc,
                                    const EnergySeries& energies,
                                    const SystemConfig& cfg,
                                    double tolerance_rel = 1e-9);

}  // namespace solarsched
