#pragma once

#include <cstdint>
#include <vector>

#include "solarsched/ingest.hpp"

namespace solarsched {

// Parameters of the synthetic solar day generator: a half-sine daylight
// envelope scaled by a day-to-day AR(1) weather factor, with independent
// multiplicative noise on the power and irradiation channels (independent
// noise keeps the two channels from being exactly collinear, which would
// make the weight fit singular).
struct SyntheticSpec {
  int days = 4;
  int subhours_per_day = 48;
  double subhour_s = 1800.0;
  double peak_power_w = 18.0;       // clear-sky panel output at solar noon
  int sunrise_subhour = 12;         // first daylight sub-hour (inclusive)
  int sunset_subhour = 36;          // first dark sub-hour after daylight
  double day_ar1_rho = 0.85;        // weather persistence
  double day_ar1_sigma = 0.3;
  double slot_noise_sigma = 0.05;   // per-sub-hour power noise
  double irradiation_peak = 900.0;  // W/m^2 at solar noon
  double irradiation_noise_sigma = 0.05;
  std::uint64_t seed = 1;
  std::int64_t start_epoch_s = 0;

  void validate() const;
};

// Generated per-sub-hour values, row-major over days.
struct SyntheticTraces {
  SyntheticSpec spec;
  std::vector<double> power_w;      // length days * subhours_per_day
  std::vector<double> irradiation;  // same length
};

// Deterministic for a given spec: one weather draw per day, then one power
// and one irradiation noise draw per sub-hour (night included, so shifting
// sunrise/sunset does not shift the stream).
SyntheticTraces generate_synthetic(const SyntheticSpec& spec);

// Zero-order-hold traces sampled at each sub-hour start, with a terminating
// zero sample at the exact end so resampling covers the final window.
Trace to_power_trace(const SyntheticTraces& traces);
Trace to_irradiation_trace(const SyntheticTraces& traces);

// Clear-sky daylight envelope value for one sub-hour (0 at night).
double daylight_envelope(const SyntheticSpec& spec, int subhour_of_day);

// Peak power such that a noise-free average day harvests target_j joules.
double peak_for_daily_energy(double target_j, const SyntheticSpec& spec);

}  // namespace solarsched
