#include "solarsched/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "kv_file.hpp"

namespace solarsched {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Howard Hinnant's days-from-civil: days since 1970-01-01 for a proleptic
// Gregorian date.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_epoch_seconds(const std::string& s, std::int64_t& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  out = v;
  return true;
}

bool parse_iso8601(const std::string& s, std::int64_t& out) {
  int y;
  unsigned mo, d, h, mi, se;
  char sep;
  char tail[4] = {0};
  int n = std::sscanf(s.c_str(), "%d-%2u-%2u%c%2u:%2u:%2u%3s", &y, &mo, &d,
                      &sep, &h, &mi, &se, tail);
  if (n < 7 || (sep != 'T' && sep != ' ')) return false;
  if (n == 8 && std::string(tail) != "Z") return false;
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) {
    return false;
  }
  out = days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
  return true;
}

std::int64_t parse_timestamp(const std::string& s, std::size_t line) {
  std::int64_t t;
  if (parse_epoch_seconds(s, t)) return t;
  if (parse_iso8601(s, t)) return t;
  throw ParseError("unrecognized timestamp '" + s + "'", line);
}

double parse_value(const std::string& s, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE ||
      !std::isfinite(v)) {
    throw ParseError("unrecognized value '" + s + "'", line);
  }
  if (v < 0.0) {
    throw ParseError("negative trace value " + s, line);
  }
  return v;
}

}  // namespace

Trace load_trace(const std::string& path, TraceKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path, 0);

  Trace trace;
  trace.kind = kind;
  std::string line;
  std::size_t lineno = 0;
  bool saw_any_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    saw_any_line = true;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t comma = t.find(',');
    if (comma == std::string::npos) {
      throw ParseError("expected 'timestamp,value'", lineno);
    }
    std::string ts = detail::trim(t.substr(0, comma));
    std::string val = detail::trim(t.substr(comma + 1));
    if (ts == "timestamp" && val == "value") continue;  // header
    TraceSample sample;
    sample.timestamp_s = parse_timestamp(ts, lineno);
    sample.value = parse_value(val, lineno);
    if (!trace.samples.empty() &&
        sample.timestamp_s <= trace.samples.back().timestamp_s) {
      throw DataError("non-monotone timestamp at line " +
                      std::to_string(lineno) + " of " + path);
    }
    trace.samples.push_back(sample);
  }
  trace.empty_warning = trace.samples.empty();
  (void)saw_any_line;
  return trace;
}

void save_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write trace file: " + path);
  out << "timestamp,value\n";
  for (const auto& s : trace.samples) {
    out << s.timestamp_s << "," << fmt_double(s.value) << "\n";
  }
}

std::vector<double> SubHourSeries::energies_j() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.energy_j);
  return out;
}

std::vector<double> SubHourSeries::irradiations() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.mean_irradiation);
  return out;
}

SubHourSeries resample_to_subhours(const Trace& trace, const SystemConfig& cfg,
                                   std::int64_t origin_epoch_s,
                                   GapPolicy gaps) {
  const double w = cfg.slot_length_s;
  if (!(w > 0.0)) throw InvalidInputError("window width must be positive");

  SubHourSeries series;
  series.window_s = w;
  series.irradiation_is_proxy = (trace.kind == TraceKind::Power);
  if (trace.samples.size() < 2) {
    series.start_epoch_s =
        origin_epoch_s >= 0
            ? origin_epoch_s
            : (trace.samples.empty() ? 0 : trace.samples.front().timestamp_s);
    return series;  // no held interval exists, so no complete window
  }

  const std::int64_t origin = origin_epoch_s >= 0
                                  ? origin_epoch_s
                                  : trace.samples.front().timestamp_s;
  series.start_epoch_s = origin;
  const std::int64_t last_ts = trace.samples.back().timestamp_s;

  std::size_t j = 0;  // sample whose value holds at the current position
  for (int i = 0;; ++i) {
    const double w0 = static_cast<double>(origin) + i * w;
    const double w1 = w0 + w;
    if (!(w0 < static_cast<double>(last_ts))) break;

    double integral = 0.0;
    double covered = 0.0;
    while (j + 1 < trace.samples.size() &&
           static_cast<double>(trace.samples[j + 1].timestamp_s) <= w0) {
      ++j;
    }
    for (std::size_t s = j; s + 1 < trace.samples.size(); ++s) {
      const double a = static_cast<double>(trace.samples[s].timestamp_s);
      const double b = static_cast<double>(trace.samples[s + 1].timestamp_s);
      const double lo = std::max(a, w0);
      const double hi = std::min(b, w1);
      if (hi <= lo) {
        if (a >= w1) break;
        continue;
      }
      integral += trace.samples[s].value * (hi - lo);
      covered += hi - lo;
    }

    SubHourValue v;
    if (covered < w - 1e-9 * w) {
      if (gaps == GapPolicy::Error) {
        throw GapError("window " + std::to_string(i) +
                       " is not fully covered by the trace (covered " +
                       std::to_string(covered) + " of " + std::to_string(w) +
                       " s); pass fill-gaps=zero to zero-fill");
      }
      v.gap_filled = true;
    }
    const double mean = integral / w;
    if (trace.kind == TraceKind::Power) {
      v.energy_j = integral;
      v.mean_irradiation = mean;  // proxy channel
    } else {
      v.mean_irradiation = mean;
      v.energy_j = integral;  // channel value treated as watts
    }
    series.values.push_back(v);
  }
  return series;
}

SubHourSeries merge_channels(const SubHourSeries& power,
                             const SubHourSeries& irradiation) {
  if (power.start_epoch_s != irradiation.start_epoch_s ||
      power.window_s != irradiation.window_s ||
      power.size() != irradiation.size()) {
    throw InvalidInputError(
        "power and irradiation series do not cover the same windows");
  }
  SubHourSeries merged = power;
  merged.irradiation_is_proxy = false;
  for (int i = 0; i < merged.size(); ++i) {
    merged.values[i].mean_irradiation = irradiation.values[i].mean_irradiation;
    merged.values[i].gap_filled =
        power.values[i].gap_filled || irradiation.values[i].gap_filled;
  }
  return merged;
}

EnergySeries frame_energies(const SubHourSeries& series, int start_index,
                            int slots) {
  if (start_index < 0 || slots < 1 || start_index + slots > series.size()) {
    throw InvalidInputError("frame window is outside the sub-hour series");
  }
  EnergySeries out;
  out.origin_epoch_s =
      series.start_epoch_s +
      static_cast<std::int64_t>(start_index * series.window_s);
  out.entries.reserve(slots);
  for (int i = 0; i < slots; ++i) {
    out.entries.push_back(
        {series.values[start_index + i].energy_j, Provenance::Measured});
  }
  return out;
}

void save_subhour_csv(const SubHourSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write sub-hour CSV: " + path);
  out << "subhour_index,energy_kj,mean_irradiation\n";
  for (int i = 0; i < series.size(); ++i) {
    out << i << "," << fmt_double(series.values[i].energy_j / 1000.0) << ","
        << fmt_double(series.values[i].mean_irradiation) << "\n";
  }
}

SubHourSeries load_subhour_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sub-hour CSV: " + path, 0);
  SubHourSeries series;
  std::string line;
  std::size_t lineno = 0;
  int expected_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("subhour_index", 0) == 0) continue;
    auto fields = detail::split_csv_list(t);
    if (fields.size() != 3) {
      throw ParseError("expected 'subhour_index,energy_kj,mean_irradiation'",
                       lineno);
    }
    detail::KvEntry idx{"subhour_index", fields[0], lineno};
    detail::KvEntry ekj{"energy_kj", fields[1], lineno};
    detail::KvEntry irr{"mean_irradiation", fields[2], lineno};
    if (detail::kv_to_long(idx) != expected_index) {
      throw ParseError("sub-hour indices must be consecutive from 0", lineno);
    }
    ++expected_index;
    SubHourValue v;
    v.energy_j = detail::kv_to_double(ekj) * 1000.0;
    v.mean_irradiation = detail::kv_to_double(irr);
    series.values.push_back(v);
  }
  return series;
}

}  // namespace solarsched
