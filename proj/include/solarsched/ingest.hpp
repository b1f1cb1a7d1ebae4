#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "solarsched/domain.hpp"

namespace solarsched {

enum class TraceKind { Power, Irradiation };

struct TraceSample {
  std::int64_t timestamp_s = 0;  // epoch seconds, UTC
  double value = 0.0;            // W for power traces, channel units otherwise
};

struct Trace {
  TraceKind kind = TraceKind::Power;
  std::vector<TraceSample> samples;
  bool empty_warning = false;  // set when the file had a header but no rows
};

// Loads a `timestamp,value` CSV. Timestamps are ISO-8601
// (YYYY-MM-DDTHH:MM:SS, 'T' or space separator, optional trailing 'Z')
// or plain epoch seconds. The header row is optional.
// Malformed rows and negative values raise ParseError with the line number;
// non-increasing timestamps raise DataError; an empty file yields an empty
// sample list with empty_warning set.
Trace load_trace(const std::string& path, TraceKind kind);

void save_trace(const Trace& trace, const std::string& path);

enum class GapPolicy { Error, FillZero };

struct SubHourValue {
  double energy_j = 0.0;
  double mean_irradiation = 0.0;
  bool gap_filled = false;
};

// Fixed-width aggregation of a trace. When built from a power trace alone,
// mean_irradiation is the window mean power (proxy channel) and
// irradiation_is_proxy is set; merge_channels() replaces the proxy with a
// real irradiation channel.
struct SubHourSeries {
  std::int64_t start_epoch_s = 0;
  double window_s = 1800.0;
  bool irradiation_is_proxy = false;
  std::vector<SubHourValue> values;

  int size() const { return static_cast<int>(values.size()); }
  std::vector<double> energies_j() const;
  std::vector<double> irradiations() const;
};

// Zero-order-hold resampling: each sample's value holds until the next
// timestamp, and window energy is the integral of held power over the
// window (equivalently time-weighted mean power times the window length).
// Windows are [origin + i*w, origin + (i+1)*w) for every window start
// strictly before the last sample; coverage ends at the last timestamp.
// A window whose covered duration falls short of the window length is a gap:
// GapError by default, or zero-filled and flagged under GapPolicy::FillZero.
// origin_epoch_s < 0 means "use the first sample's timestamp".
SubHourSeries resample_to_subhours(const Trace& trace, const SystemConfig& cfg,
                                   std::int64_t origin_epoch_s = -1,
                                   GapPolicy gaps = GapPolicy::Error);

// Combines a power-derived series (energy channel) with an
// irradiation-derived one (irradiation channel). Origins, window widths and
// lengths must match.
SubHourSeries merge_channels(const SubHourSeries& power,
                             const SubHourSeries& irradiation);

// Extracts one frame of measured energies starting at a sub-hour index.
EnergySeries frame_energies(const SubHourSeries& series, int start_index,
                            int slots);

// CSV round-trip, columns: subhour_index,energy_kj,mean_irradiation
void save_subhour_csv(const SubHourSeries& series, const std::string& path);
SubHourSeries load_subhour_csv(const std::string& path);

}  // namespace solarsched
