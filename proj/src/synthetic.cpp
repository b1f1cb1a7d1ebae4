#include "solarsched/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace solarsched {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SyntheticSpec::validate() const {
  if (days < 1) throw InvalidInputError("need at least one day");
  if (subhours_per_day < 1) throw InvalidInputError("need sub-hours per day");
  if (!(subhour_s > 0.0)) throw InvalidInputError("sub-hour must be positive");
  if (sunrise_subhour < 0 || sunset_subhour <= sunrise_subhour ||
      sunset_subhour > subhours_per_day) {
    throw InvalidInputError("daylight window is out of range");
  }
  if (!(peak_power_w >= 0.0) || !(irradiation_peak >= 0.0)) {
    throw InvalidInputError("peaks must be nonnegative");
  }
  if (!(day_ar1_rho >= 0.0) || day_ar1_rho >= 1.0) {
    throw InvalidInputError("weather persistence must be in [0, 1)");
  }
  if (!(day_ar1_sigma >= 0.0) || !(slot_noise_sigma >= 0.0) ||
      !(irradiation_noise_sigma >= 0.0)) {
    throw InvalidInputError("noise levels must be nonnegative");
  }
}

double daylight_envelope(const SyntheticSpec& spec, int subhour_of_day) {
  if (subhour_of_day < spec.sunrise_subhour ||
      subhour_of_day >= spec.sunset_subhour) {
    return 0.0;
  }
  const double span = spec.sunset_subhour - spec.sunrise_subhour;
  const double phase = (subhour_of_day + 0.5 - spec.sunrise_subhour) / span;
  return std::sin(kPi * phase);
}

SyntheticTraces generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticTraces out;
  out.spec = spec;
  const int total = spec.days * spec.subhours_per_day;
  out.power_w.resize(total);
  out.irradiation.resize(total);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double weather = 0.0;
  for (int d = 0; d < spec.days; ++d) {
    weather = spec.day_ar1_rho * weather + spec.day_ar1_sigma * gauss(rng);
    const double day_factor = std::clamp(1.0 + weather, 0.15, 2.5);
    for (int k = 0; k < spec.subhours_per_day; ++k) {
      const double pn = gauss(rng);
      const double in = gauss(rng);
      const double env = daylight_envelope(spec, k) * day_factor;
      const int idx = d * spec.subhours_per_day + k;
      out.power_w[idx] = spec.peak_power_w * env *
                         std::max(0.0, 1.0 + spec.slot_noise_sigma * pn);
      out.irradiation[idx] =
          spec.irradiation_peak * env *
          std::max(0.0, 1.0 + spec.irradiation_noise_sigma * in);
    }
  }
  return out;
}

namespace {

Trace to_trace(const SyntheticTraces& traces, const std::vector<double>& values,
               TraceKind kind) {
  Trace t;
  t.kind = kind;
  const auto& spec = traces.spec;
  const std::int64_t step = static_cast<std::int64_t>(spec.subhour_s);
  t.samples.reserve(values.size() + 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.samples.push_back(
        {spec.start_epoch_s + static_cast<std::int64_t>(i) * step, values[i]});
  }
  t.samples.push_back(
      {spec.start_epoch_s + static_cast<std::int64_t>(values.size()) * step,
       0.0});
  return t;
}

}  // namespace

Trace to_power_trace(const SyntheticTraces& traces) {
  return to_trace(traces, traces.power_w, TraceKind::Power);
}

Trace to_irradiation_trace(const SyntheticTraces& traces) {
  return to_trace(traces, traces.irradiation, TraceKind::Irradiation);
}

double peak_for_daily_energy(double target_j, const SyntheticSpec& spec) {
  spec.validate();
  if (!(target_j >= 0.0)) {
    throw InvalidInputError("target energy must be nonnegative");
  }
  double env_sum = 0.0;
  for (int k = 0; k < spec.subhours_per_day; ++k) {
    env_sum += daylight_envelope(spec, k);
  }
  if (env_sum == 0.0) {
    throw InvalidInputError("daylight window has zero envelope");
  }
  return target_j / (env_sum * spec.subhour_s);
}

}  // namespace solarsched
