#pragma once

#include <string>
#include <vector>

#include "solarsched/domain.hpp"
#include "solarsched/ingest.hpp"
#include "solarsched/predictor.hpp"

namespace solarsched {

// Maximally flat transmit-power profile that is causality-feasible and
// spends the whole harvest: repeatedly extend the current segment to the
// index minimizing the average slope (cumulative energy minus energy
// already spent, divided by segment duration), ties resolved toward the
// longer segment. Segment slopes are compared by cross-multiplication, so
// the selection is exact for integer-valued inputs. The result is
// nondecreasing and scales linearly with the input energies.
std::vector<double> flat_power_allocation(const std::vector<double>& energy_j,
                                          const SystemConfig& cfg);

// Running per-gateway bit totals within a frame.
struct CumulativeBits {
  std::vector<double> bits;

  explicit CumulativeBits(int num_gateways)
      : bits(static_cast<std::size_t>(num_gateways), 0.0) {}
  void add(int gateway, double delivered_bits);
  bool all_zero() const;
};

// Picks the gateway that receives the whole slot. First slot of a frame
// (or an all-zero cumulative) goes to the highest instantaneous rate;
// afterwards gateways that have not been served yet take priority, and
// otherwise the slot goes to the largest ratio of deliverable bits this
// slot to bits accumulated so far. Scores equal within 1e-12 relative are
// ties, breaking toward the larger channel gain, then the lower gateway
// index; the band keeps the equal-score slots that flat power segments
// produce deterministic. slot_1based counts from 1.
int assign_slot(int slot_1based, const std::vector<double>& rates_bps,
                const CumulativeBits& cumulative, const SystemConfig& cfg);

// Offline proportional-fair schedule on a known harvest series: flat power
// plus greedy whole-slot assignment.
Schedule ptf_offline(const EnergySeries& energies, const SystemConfig& cfg);

// "Spend what you get" baseline: each slot transmits that slot's harvest
// (p_t = E_t / T) and the slot is time-shared equally by all gateways.
Schedule sg_tdma(const EnergySeries& energies, const SystemConfig& cfg);

// Planning input of the online scheduler: entry 1 is the measured current
// slot plus the unspent carryover, entry 2 the filter's one-step-ahead
// prediction, the remaining entries the two-day-average baseline.
struct PredictedHarvestSeries {
  EnergySeries entries;
  double carryover_j = 0.0;
};

// Builds the series above. Predictions are clamped at zero; a negative
// residual indicates a causality accounting bug upstream and throws
// InvalidInputError.
PredictedHarvestSeries build_predicted_series(
    double measured_now_j, double ksep_next_j,
    const std::vector<double>& ssep_rest_j, double residual_j);

// How far the per-slot re-plan looks ahead.
//  FrameClipped: plan over the remaining slots of the current frame only;
//    with perfect predictions this reproduces the offline schedule exactly
//    and the frame always ends fully spent.
//  Sliding: plan over a full frame-length window that extends into the next
//    frame (tail entries predicted); leftover energy carries across frames.
enum class PlanHorizon { FrameClipped, Sliding };

// Which predictions feed the plan: the fitted filter plus the two-day
// baseline, or the true future energies (testing oracle).
enum class PredictorKind { KalmanSsep, Oracle };

struct PtfonOptions {
  PlanHorizon horizon = PlanHorizon::FrameClipped;
  PredictorKind predictor = PredictorKind::KalmanSsep;
};

struct PtfonFrame {
  int frame_start_index = 0;
  Schedule schedule;
  int cap_events = 0;        // prediction-overshoot guard activations
  double residual_end_j = 0.0;
  std::vector<double> real_j;  // measured per-slot energies, length K
  // One-step-ahead predictions made inside this frame: ksep_pred_j[i] is the
  // prediction for frame slot i+2 issued at slot i+1 (length K-1).
  std::vector<double> ksep_pred_j;
  // Two-day-average prediction for every slot of the frame (length K).
  std::vector<double> ssep_pred_j;
};

struct PtfonResult {
  std::vector<PtfonFrame> frames;
};

// Online proportional-fair scheduling over consecutive frames of a measured
// timeline. Each slot: observe the slot's harvest, update the filter,
// rebuild the predicted series (measured + carryover, filter, baseline),
// re-plan flat power over the horizon, commit only the current slot
// (capped at the true available energy), assign the slot greedily against
// the frame's cumulative bits, and carry the unspent residual forward.
// Needs two full measured days before the first frame; the filter is
// re-initialized from the previous day at every frame start.
PtfonResult ptfon_run(const SubHourSeries& timeline, int first_frame_start,
                      int frame_count, const SystemConfig& cfg,
                      const PredictorModel& model,
                      const PtfonOptions& options = {});

// CSV with columns slot,power_w,gateway,bits (slot is 1-based; gateway is
// -1 for a time-shared slot; bits are the bits delivered in that slot).
void save_schedule_csv(const Schedule& schedule, const SystemConfig& cfg,
                       const std::string& path);

}  // namespace solarsched
