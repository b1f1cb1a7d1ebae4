#pragma once

#include <limits>
#include <string>
#include <vector>

#include "solarsched/domain.hpp"

namespace solarsched {

constexpr double kBitsPerGigabyte = 8e9;

inline double bits_to_gigabytes(double bits) { return bits / kBitsPerGigabyte; }

// Jain fairness index (sum x)^2 / (N * sum x^2), in (0, 1].
// Throws InvalidInputError on an empty or negative input and
// UndefinedFairnessError when every entry is zero.
double jain_index(const std::vector<double>& values);

// One frame of one algorithm's run. MSE fields are NaN when the algorithm
// has no predictor (offline, baseline) and are reported in kJ^2.
struct FrameRecord {
  std::string algorithm;
  int frame_index = 0;
  std::vector<double> bits_per_gateway;
  int cap_events = 0;
  double mse_ksep_kj2 = std::numeric_limits<double>::quiet_NaN();
  double mse_ssep_kj2 = std::numeric_limits<double>::quiet_NaN();

  double total_bits() const;
};

// Per-algorithm aggregate over every frame of a run. Means over predictor
// errors skip frames without them; mean_utility skips frames where some
// gateway got zero bits (utility_frames counts the rest).
struct AlgorithmSummary {
  std::string algorithm;
  int frames = 0;
  std::vector<double> bits_per_gateway;  // summed across frames
  double total_bits = 0.0;
  double total_gigabytes = 0.0;
  double mean_frame_jain = 0.0;
  double min_frame_jain = 0.0;
  double overall_jain = 0.0;  // Jain of the summed per-gateway totals
  double mean_utility = 0.0;
  int utility_frames = 0;
  double mean_mse_ksep_kj2 = std::numeric_limits<double>::quiet_NaN();
  double mean_mse_ssep_kj2 = std::numeric_limits<double>::quiet_NaN();
  int cap_events = 0;
};

struct RunReport {
  std::vector<FrameRecord> frames;
  std::vector<AlgorithmSummary> summaries;  // in first-appearance order
};

// Aggregates frame records into a report. Frames of the same algorithm must
// agree on the gateway count; throws InvalidInputError otherwise.
RunReport summarize_run(const std::vector<FrameRecord>& frames);

// JSON report: {"frames": [...], "summaries": [...]}; NaN fields are omitted.
void save_report_json(const RunReport& report, const std::string& path);

// CSV report, one row per frame per algorithm:
// frame,algorithm,total_bits,total_gigabytes,jain_index,log_utility,
// mse_ksep_kj2,mse_ssep_kj2,cap_events,bits_g1,...,bits_gN
// Undefined cells (NaN MSE, zero-bit utility/fairness) are left empty.
void save_report_csv(const RunReport& report, const std::string& path);

}  // namespace solarsched
