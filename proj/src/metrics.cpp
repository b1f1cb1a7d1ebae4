#include "solarsched/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

namespace solarsched {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// Utility of one frame, or NaN when some gateway got nothing.
double utility_or_nan(const std::vector<double>& bits) {
  double u = 0.0;
  for (double b : bits) {
    if (!(b > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    u += std::log2(b);
  }
  return u;
}

double jain_or_nan(const std::vector<double>& bits) {
  try {
    return jain_index(bits);
  } catch (const UndefinedFairnessError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

double FrameRecord::total_bits() const {
  double s = 0.0;
  for (double b : bits_per_gateway) s += b;
  return s;
}

double jain_index(const std::vector<double>& values) {
  if (values.empty()) {
    throw InvalidInputError("fairness index needs at least one value");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidInputError("fairness index needs finite nonnegative values");
    }
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) {
    throw UndefinedFairnessError("fairness index of an all-zero vector");
  }
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

RunReport summarize_run(const std::vector<FrameRecord>& frames) {
  RunReport report;
  report.frames = frames;

  std::vector<std::string> order;
  std::map<std::string, AlgorithmSummary> agg;
  std::map<std::string, double> jain_sum;
  std::map<std::string, double> mse_k_sum, mse_s_sum;
  std::map<std::string, int> jain_n, mse_k_n, mse_s_n;

  for (const auto& f : frames) {
    if (f.bits_per_gateway.empty()) {
      throw InvalidInputError("frame record without per-gateway bits");
    }
    auto it = agg.find(f.algorithm);
    if (it == agg.end()) {
      AlgorithmSummary s;
      s.algorithm = f.algorithm;
      s.bits_per_gateway.assign(f.bits_per_gateway.size(), 0.0);
      s.min_frame_jain = std::numeric_limits<double>::infinity();
      it = agg.emplace(f.algorithm, std::move(s)).first;
      order.push_back(f.algorithm);
    }
    AlgorithmSummary& s = it->second;
    if (s.bits_per_gateway.size() != f.bits_per_gateway.size()) {
      throw InvalidInputError("gateway count changed between frames of " +
                              f.algorithm);
    }
    s.frames += 1;
    s.cap_events += f.cap_events;
    for (std::size_t g = 0; g < f.bits_per_gateway.size(); ++g) {
      s.bits_per_gateway[g] += f.bits_per_gateway[g];
      s.total_bits += f.bits_per_gateway[g];
    }
    const double u = utility_or_nan(f.bits_per_gateway);
    if (!std::isnan(u)) {
      s.mean_utility += u;
      s.utility_frames += 1;
    }
    const double j = jain_or_nan(f.bits_per_gateway);
    if (!std::isnan(j)) {
      jain_sum[f.algorithm] += j;
      jain_n[f.algorithm] += 1;
      s.min_frame_jain = std::min(s.min_frame_jain, j);
    }
    if (!std::isnan(f.mse_ksep_kj2)) {
      mse_k_sum[f.algorithm] += f.mse_ksep_kj2;
      mse_k_n[f.algorithm] += 1;
    }
    if (!std::isnan(f.mse_ssep_kj2)) {
      mse_s_sum[f.algorithm] += f.mse_ssep_kj2;
      mse_s_n[f.algorithm] += 1;
    }
  }

  for (const auto& name : order) {
    AlgorithmSummary s = agg.at(name);
    s.total_gigabytes = bits_to_gigabytes(s.total_bits);
    s.overall_jain = jain_or_nan(s.bits_per_gateway);
    if (s.utility_frames > 0) {
      s.mean_utility /= s.utility_frames;
    } else {
      s.mean_utility = std::numeric_limits<double>::quiet_NaN();
    }
    if (jain_n[name] > 0) {
      s.mean_frame_jain = jain_sum[name] / jain_n[name];
    } else {
      s.mean_frame_jain = std::numeric_limits<double>::quiet_NaN();
      s.min_frame_jain = std::numeric_limits<double>::quiet_NaN();
    }
    if (mse_k_n[name] > 0) s.mean_mse_ksep_kj2 = mse_k_sum[name] / mse_k_n[name];
    if (mse_s_n[name] > 0) s.mean_mse_ssep_kj2 = mse_s_sum[name] / mse_s_n[name];
    report.summaries.push_back(std::move(s));
  }
  return report;
}

void save_report_json(const RunReport& report, const std::string& path) {
  nlohmann::ordered_json root;
  root["frames"] = nlohmann::ordered_json::array();
  for (const auto& f : report.frames) {
    nlohmann::ordered_json jf;
    jf["frame"] = f.frame_index;
    jf["algorithm"] = f.algorithm;
    jf["bits_per_gateway"] = f.bits_per_gateway;
    jf["total_bits"] = f.total_bits();
    jf["total_gigabytes"] = bits_to_gigabytes(f.total_bits());
    const double jain = jain_or_nan(f.bits_per_gateway);
    if (!std::isnan(jain)) jf["jain_index"] = jain;
    const double u = utility_or_nan(f.bits_per_gateway);
    if (!std::isnan(u)) jf["log_utility"] = u;
    if (!std::isnan(f.mse_ksep_kj2)) jf["mse_ksep_kj2"] = f.mse_ksep_kj2;
    if (!std::isnan(f.mse_ssep_kj2)) jf["mse_ssep_kj2"] = f.mse_ssep_kj2;
    jf["cap_events"] = f.cap_events;
    root["frames"].push_back(std::move(jf));
  }
  root["summaries"] = nlohmann::ordered_json::array();
  for (const auto& s : report.summaries) {
    nlohmann::ordered_json js;
    js["algorithm"] = s.algorithm;
    js["frames"] = s.frames;
    js["bits_per_gateway"] = s.bits_per_gateway;
    js["total_bits"] = s.total_bits;
    js["total_gigabytes"] = s.total_gigabytes;
    if (!std::isnan(s.mean_frame_jain)) {
      js["mean_frame_jain"] = s.mean_frame_jain;
      js["min_frame_jain"] = s.min_frame_jain;
    }
    if (!std::isnan(s.overall_jain)) js["overall_jain"] = s.overall_jain;
    if (s.utility_frames > 0) {
      js["mean_log_utility"] = s.mean_utility;
      js["utility_frames"] = s.utility_frames;
    }
    if (!std::isnan(s.mean_mse_ksep_kj2)) {
      js["mean_mse_ksep_kj2"] = s.mean_mse_ksep_kj2;
    }
    if (!std::isnan(s.mean_mse_ssep_kj2)) {
      js["mean_mse_ssep_kj2"] = s.mean_mse_ssep_kj2;
    }
    js["cap_events"] = s.cap_events;
    root["summaries"].push_back(std::move(js));
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write report JSON: " + path);
  out << root.dump(2) << "\n";
}

void save_report_csv(const RunReport& report, const std::string& path) {
  std::size_t gateways = 0;
  for (const auto& f : report.frames) {
    gateways = std::max(gateways, f.bits_per_gateway.size());
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write report CSV: " + path);
  out << "frame,algorithm,total_bits,total_gigabytes,jain_index,log_utility,"
         "mse_ksep_kj2,mse_ssep_kj2,cap_events";
  for (std::size_t g = 0; g < gateways; ++g) out << ",bits_g" << (g + 1);
  out << "\n";
  for (const auto& f : report.frames) {
    out << f.frame_index << "," << f.algorithm << ","
        << fmt_double(f.total_bits()) << ","
        << fmt_double(bits_to_gigabytes(f.total_bits())) << ",";
    const double jain = jain_or_nan(f.bits_per_gateway);
    if (!std::isnan(jain)) out << fmt_double(jain);
    out << ",";
    const double u = utility_or_nan(f.bits_per_gateway);
    if (!std::isnan(u)) out << fmt_double(u);
    out << ",";
    if (!std::isnan(f.mse_ksep_kj2)) out << fmt_double(f.mse_ksep_kj2);
    out << ",";
    if (!std::isnan(f.mse_ssep_kj2)) out << fmt_double(f.mse_ssep_kj2);
    out << "," << f.cap_events;
    for (std::size_t g = 0; g < gateways; ++g) {
      out << ",";
      if (g < f.bits_per_gateway.size()) {
        out << fmt_double(f.bits_per_gateway[g]);
      }
    }
    out << "\n";
  }
}

}  // namespace solarsched
