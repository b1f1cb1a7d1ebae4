// Command line front end: synthetic trace generation, predictor fitting and
// evaluation, offline/online schedule computation, and side-by-side
// comparison runs that write machine-readable reports.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "solarsched/config_io.hpp"
#include "solarsched/domain.hpp"
#include "solarsched/errors.hpp"
#include "solarsched/ingest.hpp"
#include "solarsched/metrics.hpp"
#include "solarsched/predictor.hpp"
#include "solarsched/refsolver.hpp"
#include "solarsched/scheduler.hpp"
#include "solarsched/synthetic.hpp"

namespace {

using namespace solarsched;

std::string fmt(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

SystemConfig default_config() {
  SystemConfig cfg;
  cfg.gateways.push_back(GatewayChannel::from_path_loss(0, 78.0));
  cfg.gateways.push_back(GatewayChannel::from_path_loss(1, 92.0));
  cfg.gateways.push_back(GatewayChannel::from_path_loss(2, 100.0));
  return cfg;
}

SystemConfig resolve_config(const std::string& path) {
  if (path.empty()) return default_config();
  return load_system_config(path);
}

GapPolicy gap_policy(const std::string& fill_gaps) {
  return fill_gaps == "zero" ? GapPolicy::FillZero : GapPolicy::Error;
}

// Loads the power trace (and the irradiation trace when given) and
// aggregates both onto the config's sub-hour grid. The two channels are
// trimmed to their common covered length before merging.
SubHourSeries load_series(const std::string& power_path,
                          const std::string& irr_path,
                          const std::string& fill_gaps,
                          const SystemConfig& cfg) {
  const GapPolicy policy = gap_policy(fill_gaps);
  Trace power = load_trace(power_path, TraceKind::Power);
  SubHourSeries series = resample_to_subhours(power, cfg, -1, policy);
  if (series.size() == 0) {
    throw DataError("power trace covers no complete sub-hour window: " +
                    power_path);
  }
  if (!irr_path.empty()) {
    Trace irr = load_trace(irr_path, TraceKind::Irradiation);
    SubHourSeries irr_series =
        resample_to_subhours(irr, cfg, series.start_epoch_s, policy);
    const int common = std::min(series.size(), irr_series.size());
    if (common == 0) {
      throw DataError(
          "irradiation trace does not overlap the power trace window grid: " +
          irr_path);
    }
    series.values.resize(common);
    irr_series.values.resize(common);
    series = merge_channels(series, irr_series);
  }
  return series;
}

// A model for the online run: loaded from a file, or fitted on the series.
PredictorModel resolve_model(const std::string& model_path,
                             const SubHourSeries& series,
                             const std::vector<double>& init,
                             const std::string& method, int period) {
  if (!model_path.empty()) return load_predictor_model(model_path);
  if (series.irradiation_is_proxy) {
    throw InvalidInputError(
        "fitting needs a real irradiation channel (--irr) or a saved model "
        "(--model): the window-mean power proxy is exactly collinear with "
        "the energy history, which makes the fit singular");
  }
  const WeightSet w0{init[0], init[1], init[2]};
  const FitMethod m =
      method == "ls" ? FitMethod::LeastSquares : FitMethod::Newton;
  return model_from_fit(fit_weights(series, w0, m, period));
}

// Refuses to emit any schedule that fails its own feasibility re-check.
void ensure_feasible(const Allocation& alloc, const EnergySeries& energies,
                     const SystemConfig& cfg, const std::string& label) {
  FeasibilityReport rep = check_feasibility(alloc, energies, cfg);
  if (!rep.feasible()) {
    std::string worst;
    double worst_rel = -1.0;
    for (const auto& v : rep.violations) {
      if (v.relative > worst_rel) {
        worst_rel = v.relative;
        worst = v.describe();
      }
    }
    throw InfeasibleScheduleError(label + " schedule failed its feasibility "
                                          "re-check: " +
                                  worst);
  }
}

void save_allocation_csv(const Allocation& alloc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write allocation CSV: " + path);
  out << "slot,power_w";
  for (int g = 0; g < alloc.num_gateways(); ++g) out << ",time_s_g" << (g + 1);
  out << "\n";
  for (int t = 0; t < alloc.num_slots(); ++t) {
    out << (t + 1) << "," << fmt(alloc.power_w[t]);
    for (int g = 0; g < alloc.num_gateways(); ++g) {
      out << "," << fmt(alloc.time_s[t][g]);
    }
    out << "\n";
  }
}

double mse_kj2(const std::vector<double>& real_j,
               const std::vector<double>& pred_j) {
  return prediction_mse(real_j, pred_j) / 1e6;
}

// Per-frame record of an online frame, including the squared prediction
// errors. The filter's one-step predictions cover slots 2..K.
FrameRecord record_from_ptfon(const PtfonFrame& frame, int frame_index) {
  FrameRecord rec;
  rec.algorithm = "ptfon";
  rec.frame_index = frame_index;
  rec.bits_per_gateway = frame.schedule.bits_per_gateway;
  rec.cap_events = frame.cap_events;
  const std::vector<double> real_tail(frame.real_j.begin() + 1,
                                      frame.real_j.end());
  rec.mse_ksep_kj2 = mse_kj2(real_tail, frame.ksep_pred_j);
  rec.mse_ssep_kj2 = mse_kj2(frame.real_j, frame.ssep_pred_j);
  return rec;
}

FrameRecord record_from_schedule(const std::string& algorithm,
                                 int frame_index, const Schedule& sched) {
  FrameRecord rec;
  rec.algorithm = algorithm;
  rec.frame_index = frame_index;
  rec.bits_per_gateway = sched.bits_per_gateway;
  return rec;
}

void print_summaries(const RunReport& report) {
  for (const auto& s : report.summaries) {
    std::cout << s.algorithm << ": frames=" << s.frames
              << " total_bits=" << fmt(s.total_bits)
              << " total_gb=" << fmt(s.total_gigabytes);
    if (!std::isnan(s.mean_frame_jain)) {
      std::cout << " mean_jain=" << fmt(s.mean_frame_jain)
                << " min_jain=" << fmt(s.min_frame_jain);
    }
    if (s.utility_frames > 0) {
      std::cout << " mean_utility=" << fmt(s.mean_utility);
    }
    if (!std::isnan(s.mean_mse_ksep_kj2)) {
      std::cout << " mean_mse_ksep_kj2=" << fmt(s.mean_mse_ksep_kj2);
    }
    if (!std::isnan(s.mean_mse_ssep_kj2)) {
      std::cout << " mean_mse_ssep_kj2=" << fmt(s.mean_mse_ssep_kj2);
    }
    if (s.algorithm == "ptfon") std::cout << " cap_events=" << s.cap_events;
    std::cout << "\n";
  }
}

struct CommonInputs {
  std::string config_path;
  std::string trace_path;
  std::string irr_path;
  std::string fill_gaps = "error";
};

void add_common_inputs(CLI::App* cmd, CommonInputs& in, bool irr = true) {
  cmd->add_option("--config", in.config_path,
                  "key=value system config (default: 10 MHz, 1e-19 W/Hz, "
                  "1800 s slots, 48 per frame, gateways at 78/92/100 dB)");
  cmd->add_option("--trace", in.trace_path, "power trace CSV (timestamp,value)")
      ->required();
  if (irr) {
    cmd->add_option("--irr", in.irr_path,
                    "irradiation trace CSV on the same clock");
  }
  cmd->add_option("--fill-gaps", in.fill_gaps,
                  "error | zero (zero-fill sub-hours without coverage)")
      ->check(CLI::IsMember({"error", "zero"}));
}

struct ModelInputs {
  std::string model_path;
  std::vector<double> init{0.9, 0.1, 0.01};
  std::string method = "newton";
};

void add_model_inputs(CLI::App* cmd, ModelInputs& in) {
  cmd->add_option("--model", in.model_path,
                  "saved predictor model (skips the fit)");
  cmd->add_option("--init", in.init,
                  "fit start point alpha1,alpha2,beta1")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--method", in.method, "newton | ls")
      ->check(CLI::IsMember({"newton", "ls"}));
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

int run_gen(const SyntheticSpec& spec, const std::string& out_power,
            const std::string& out_irr) {
  SyntheticTraces traces = generate_synthetic(spec);
  save_trace(to_power_trace(traces), out_power);
  if (!out_irr.empty()) save_trace(to_irradiation_trace(traces), out_irr);

  double env_sum = 0.0;
  for (int k = 0; k < spec.subhours_per_day; ++k) {
    env_sum += daylight_envelope(spec, k);
  }
  std::cout << "days=" << spec.days << " seed=" << spec.seed
            << " clear_sky_daily_kj="
            << fmt(spec.peak_power_w * env_sum * spec.subhour_s / 1000.0)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Solar-powered downlink scheduling: sub-hour harvest prediction and "
      "proportionally fair power/time allocation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate synthetic solar traces");
  SyntheticSpec spec;
  std::string gen_out_power, gen_out_irr;
  gen->add_option("--days", spec.days, "number of days");
  gen->add_option("--seed", spec.seed, "random seed");
  gen->add_option("--peak", spec.peak_power_w, "clear-sky peak power, W");
  gen->add_option("--irr-peak", spec.irradiation_peak,
                  "clear-sky peak irradiation");
  gen->add_option("--sunrise", spec.sunrise_subhour, "first daylight sub-hour");
  gen->add_option("--sunset", spec.sunset_subhour, "first dark sub-hour");
  gen->add_option("--day-rho", spec.day_ar1_rho, "weather persistence");
  gen->add_option("--day-sigma", spec.day_ar1_sigma, "weather noise");
  gen->add_option("--slot-sigma", spec.slot_noise_sigma, "power noise");
  gen->add_option("--irr-sigma", spec.irradiation_noise_sigma,
                  "irradiation noise");
  gen->add_option("--start-epoch", spec.start_epoch_s, "first timestamp");
  gen->add_option("--out-power", gen_out_power, "power trace output")
      ->required();
  gen->add_option("--out-irr", gen_out_irr, "irradiation trace output");

  // fit
  auto* fit = app.add_subcommand("fit", "fit the energy model weights");
  CommonInputs fit_in;
  ModelInputs fit_model;
  std::string fit_out;
  add_common_inputs(fit, fit_in);
  fit->add_option("--init", fit_model.init, "start point alpha1,alpha2,beta1")
      ->delimiter(',')
      ->expected(3);
  fit->add_option("--method", fit_model.method, "newton | ls")
      ->check(CLI::IsMember({"newton", "ls"}));
  fit->add_option("--out", fit_out, "write the fitted model here");

  // predict
  auto* predict =
      app.add_subcommand("predict", "evaluate the two predictors on a trace");
  CommonInputs pred_in;
  ModelInputs pred_model;
  int pred_from = 96;
  int pred_count = 48;
  std::string pred_out;
  add_common_inputs(predict, pred_in);
  add_model_inputs(predict, pred_model);
  predict->add_option("--from", pred_from,
                      "first evaluated sub-hour index (needs two prior days)");
  predict->add_option("--count", pred_count, "number of sub-hours");
  predict->add_option("--out", pred_out, "per-sub-hour prediction CSV");

  // schedule
  auto* schedule =
      app.add_subcommand("schedule", "offline schedule for one frame");
  CommonInputs sched_in;
  std::string sched_algo = "ptf";
  int sched_from = 96;
  int sched_restarts = 3;
  std::uint64_t sched_seed = 0;
  std::string sched_out, sched_trace_out;
  add_common_inputs(schedule, sched_in, /*irr=*/false);
  schedule->add_option("--algo", sched_algo, "ptf | sg_tdma | bcd")
      ->check(CLI::IsMember({"ptf", "sg_tdma", "bcd"}));
  schedule->add_option("--from", sched_from, "frame start sub-hour index");
  schedule->add_option("--restarts", sched_restarts, "bcd restarts");
  schedule->add_option("--seed", sched_seed, "bcd restart seed");
  schedule->add_option("--out", sched_out, "schedule CSV");
  schedule->add_option("--trace-out", sched_trace_out,
                       "bcd per-sweep utility CSV");

  // simulate
  auto* simulate =
      app.add_subcommand("simulate", "online scheduling over measured frames");
  CommonInputs sim_in;
  ModelInputs sim_model;
  std::string sim_algo = "ptfon";
  int sim_from = 96;
  int sim_days = 1;
  std::string sim_horizon = "clipped";
  std::string sim_predictor = "kalman";
  std::string sim_out;
  add_common_inputs(simulate, sim_in);
  add_model_inputs(simulate, sim_model);
  simulate->add_option("--algo", sim_algo, "ptfon | sg_tdma")
      ->check(CLI::IsMember({"ptfon", "sg_tdma"}));
  simulate->add_option("--from", sim_from, "first frame start sub-hour index");
  simulate->add_option("--days,--frames", sim_days, "number of frames");
  simulate->add_option("--horizon", sim_horizon,
                       "clipped (rest of frame) | sliding (full window)")
      ->check(CLI::IsMember({"clipped", "sliding"}));
  simulate->add_option("--predictor", sim_predictor,
                       "kalman | oracle (true future energies)")
      ->check(CLI::IsMember({"kalman", "oracle"}));
  simulate->add_option("--out", sim_out,
                       "directory for report.json, report.csv and per-frame "
                       "schedule CSVs");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "run several algorithms over the same frames");
  CommonInputs cmp_in;
  ModelInputs cmp_model;
  int cmp_from = 96;
  int cmp_days = 1;
  std::string cmp_horizon = "clipped";
  std::vector<std::string> cmp_algos{"ptf", "ptfon", "sg_tdma"};
  int cmp_restarts = 3;
  std::uint64_t cmp_seed = 0;
  std::string cmp_out;
  add_common_inputs(compare, cmp_in);
  add_model_inputs(compare, cmp_model);
  compare->add_option("--from", cmp_from, "first frame start sub-hour index");
  compare->add_option("--days,--frames", cmp_days, "number of frames");
  compare->add_option("--horizon", cmp_horizon, "clipped | sliding")
      ->check(CLI::IsMember({"clipped", "sliding"}));
  compare
      ->add_option("--algos", cmp_algos,
                   "subset of ptf,ptfon,sg_tdma,bcd (comma separated)")
      ->delimiter(',')
      ->check(CLI::IsMember({"ptf", "ptfon", "sg_tdma", "bcd"}));
  compare->add_option("--bcd-restarts", cmp_restarts, "bcd restarts");
  compare->add_option("--seed", cmp_seed, "bcd restart seed");
  compare->add_option("--out", cmp_out,
                      "directory for report.json and report.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen(spec, gen_out_power, gen_out_irr);

    if (fit->parsed()) {
      const SystemConfig cfg = resolve_config(fit_in.config_path);
      SubHourSeries series = load_series(fit_in.trace_path, fit_in.irr_path,
                                         fit_in.fill_gaps, cfg);
      if (series.irradiation_is_proxy) {
        throw InvalidInputError(
            "fitting needs a real irradiation channel (--irr): the "
            "window-mean power proxy is exactly collinear with the energy "
            "history, which makes the fit singular");
      }
      const WeightSet w0{fit_model.init[0], fit_model.init[1],
                         fit_model.init[2]};
      const FitMethod m = fit_model.method == "ls" ? FitMethod::LeastSquares
                                                   : FitMethod::Newton;
      FitReport rep = fit_weights(series, w0, m, cfg.slots_per_frame);
      std::cout << "alpha1=" << fmt(rep.weights.alpha1)
                << " alpha2=" << fmt(rep.weights.alpha2)
                << " beta1=" << fmt(rep.weights.beta1)
                << " mean_sq_residual=" << fmt(rep.mean_sq_residual)
                << " iterations=" << rep.iterations
                << " converged=" << (rep.converged ? 1 : 0)
                << " samples=" << rep.samples << "\n";
      if (!fit_out.empty()) {
        save_predictor_model(model_from_fit(rep), fit_out);
      }
      return 0;
    }

    if (predict->parsed()) {
      const SystemConfig cfg = resolve_config(pred_in.config_path);
      SubHourSeries series = load_series(pred_in.trace_path, pred_in.irr_path,
                                         pred_in.fill_gaps, cfg);
      PredictorModel model =
          resolve_model(pred_model.model_path, series, pred_model.init,
                        pred_model.method, cfg.slots_per_frame);
      PredictionEval eval = evaluate_predictors(series, model, pred_from,
                                                pred_count,
                                                cfg.slots_per_frame);
      if (!pred_out.empty()) {
        std::ofstream out(pred_out);
        if (!out) throw Error("cannot write prediction CSV: " + pred_out);
        out << "subhour_index,real_kj,ksep_kj,ssep_kj\n";
        for (std::size_t i = 0; i < eval.real_j.size(); ++i) {
          out << (eval.start_index + static_cast<int>(i)) << ","
              << fmt(eval.real_j[i] / 1000.0) << ","
              << fmt(eval.ksep_j[i] / 1000.0) << ","
              << fmt(eval.ssep_j[i] / 1000.0) << "\n";
        }
      }
      const double mk = mse_kj2(eval.real_j, eval.ksep_j);
      const double ms = mse_kj2(eval.real_j, eval.ssep_j);
      std::cout << "count=" << eval.real_j.size()
                << " mse_ksep_kj2=" << fmt(mk) << " mse_ssep_kj2=" << fmt(ms)
                << " mse_ratio=" << fmt(ms > 0.0 ? mk / ms
                                                 : std::numeric_limits<
                                                       double>::quiet_NaN())
                << "\n";
      return 0;
    }

    if (schedule->parsed()) {
      const SystemConfig cfg = resolve_config(sched_in.config_path);
      SubHourSeries series = load_series(sched_in.trace_path, "",
                                         sched_in.fill_gaps, cfg);
      EnergySeries energies =
          frame_energies(series, sched_from, cfg.slots_per_frame);

      std::vector<FrameRecord> records;
      if (sched_algo == "bcd") {
        BcdTrace trace =
            bcd_solve_best(energies, cfg, sched_restarts, sched_seed);
        ensure_feasible(trace.allocation, energies, cfg, "bcd");
        if (!sched_out.empty()) save_allocation_csv(trace.allocation, sched_out);
        if (!sched_trace_out.empty()) {
          save_bcd_trace_csv(trace, sched_trace_out);
        }
        FrameRecord rec;
        rec.algorithm = "bcd";
        rec.bits_per_gateway = bits_per_gateway(trace.allocation, cfg);
        records.push_back(rec);
        std::cout << "sweeps=" << trace.sweeps
                  << " converged=" << (trace.converged ? 1 : 0)
                  << " utility=" << fmt(trace.utility) << "\n";
      } else {
        Schedule sched = sched_algo == "ptf" ? ptf_offline(energies, cfg)
                                             : sg_tdma(energies, cfg);
        ensure_feasible(sched.allocation, energies, cfg, sched_algo);
        if (!sched_out.empty()) save_schedule_csv(sched, cfg, sched_out);
        records.push_back(record_from_schedule(sched_algo, 0, sched));
      }
      print_summaries(summarize_run(records));
      return 0;
    }

    if (simulate->parsed()) {
      const SystemConfig cfg = resolve_config(sim_in.config_path);
      SubHourSeries series = load_series(sim_in.trace_path, sim_in.irr_path,
                                         sim_in.fill_gaps, cfg);
      const int k = cfg.slots_per_frame;
      std::vector<FrameRecord> records;

      if (sim_algo == "sg_tdma") {
        for (int f = 0; f < sim_days; ++f) {
          EnergySeries energies = frame_energies(series, sim_from + f * k, k);
          Schedule s = sg_tdma(energies, cfg);
          ensure_feasible(s.allocation, energies, cfg, "sg_tdma");
          std::cout << "frame=" << f << " start=" << (sim_from + f * k)
                    << " total_bits=" << fmt(s.total_bits())
                    << " gb=" << fmt(bits_to_gigabytes(s.total_bits()))
                    << "\n";
          if (!sim_out.empty()) {
            save_schedule_csv(s, cfg,
                              out_path(sim_out, "schedule_frame" +
                                                    std::to_string(f) +
                                                    ".csv"));
          }
          records.push_back(record_from_schedule("sg_tdma", f, s));
        }
      } else {
        PtfonOptions opts;
        opts.horizon = sim_horizon == "sliding" ? PlanHorizon::Sliding
                                                : PlanHorizon::FrameClipped;
        opts.predictor = sim_predictor == "oracle" ? PredictorKind::Oracle
                                                   : PredictorKind::KalmanSsep;
        PredictorModel model;
        if (opts.predictor == PredictorKind::KalmanSsep) {
          model = resolve_model(sim_model.model_path, series, sim_model.init,
                                sim_model.method, k);
        }
        PtfonResult result = ptfon_run(series, sim_from, sim_days, cfg, model,
                                       opts);
        double carry_in = 0.0;
        for (std::size_t f = 0; f < result.frames.size(); ++f) {
          const PtfonFrame& frame = result.frames[f];
          EnergySeries measured =
              frame_energies(series, frame.frame_start_index, k);
          measured.entries.front().energy_j += carry_in;
          ensure_feasible(frame.schedule.allocation, measured, cfg, "ptfon");
          carry_in = frame.residual_end_j;

          FrameRecord rec = record_from_ptfon(frame, static_cast<int>(f));
          std::cout << "frame=" << f << " start=" << frame.frame_start_index
                    << " total_bits=" << fmt(rec.total_bits())
                    << " gb=" << fmt(bits_to_gigabytes(rec.total_bits()))
                    << " mse_ksep_kj2=" << fmt(rec.mse_ksep_kj2)
                    << " mse_ssep_kj2=" << fmt(rec.mse_ssep_kj2)
                    << " cap_events=" << frame.cap_events
                    << " residual_end_j=" << fmt(frame.residual_end_j) << "\n";
          if (!sim_out.empty()) {
            save_schedule_csv(frame.schedule, cfg,
                              out_path(sim_out, "schedule_frame" +
                                                    std::to_string(f) +
                                                    ".csv"));
          }
          records.push_back(std::move(rec));
        }
      }
      RunReport report = summarize_run(records);
      print_summaries(report);
      if (!sim_out.empty()) {
        save_report_json(report, out_path(sim_out, "report.json"));
        save_report_csv(report, out_path(sim_out, "report.csv"));
      }
      return 0;
    }

    if (compare->parsed()) {
      const SystemConfig cfg = resolve_config(cmp_in.config_path);
      SubHourSeries series = load_series(cmp_in.trace_path, cmp_in.irr_path,
                                         cmp_in.fill_gaps, cfg);
      const int k = cfg.slots_per_frame;

      const bool want_ptfon =
          std::find(cmp_algos.begin(), cmp_algos.end(), "ptfon") !=
          cmp_algos.end();
      PtfonResult online;
      if (want_ptfon) {
        PtfonOptions opts;
        opts.horizon = cmp_horizon == "sliding" ? PlanHorizon::Sliding
                                                : PlanHorizon::FrameClipped;
        PredictorModel model =
            resolve_model(cmp_model.model_path, series, cmp_model.init,
                          cmp_model.method, k);
        online = ptfon_run(series, cmp_from, cmp_days, cfg, model, opts);
      }

      std::vector<FrameRecord> records;
      double carry_in = 0.0;
      for (int f = 0; f < cmp_days; ++f) {
        EnergySeries energies = frame_energies(series, cmp_from + f * k, k);
        for (const auto& algo : cmp_algos) {
          if (algo == "ptf") {
            Schedule s = ptf_offline(energies, cfg);
            ensure_feasible(s.allocation, energies, cfg, "ptf");
            records.push_back(record_from_schedule("ptf", f, s));
          } else if (algo == "sg_tdma") {
            Schedule s = sg_tdma(energies, cfg);
            ensure_feasible(s.allocation, energies, cfg, "sg_tdma");
            records.push_back(record_from_schedule("sg_tdma", f, s));
          } else if (algo == "bcd") {
            BcdTrace trace =
                bcd_solve_best(energies, cfg, cmp_restarts, cmp_seed);
            ensure_feasible(trace.allocation, energies, cfg, "bcd");
            FrameRecord rec;
            rec.algorithm = "bcd";
            rec.frame_index = f;
            rec.bits_per_gateway = bits_per_gateway(trace.allocation, cfg);
            records.push_back(std::move(rec));
          } else {  // ptfon
            const PtfonFrame& frame = online.frames[f];
            EnergySeries measured = energies;
            measured.entries.front().energy_j += carry_in;
            ensure_feasible(frame.schedule.allocation, measured, cfg, "ptfon");
            carry_in = frame.residual_end_j;
            records.push_back(record_from_ptfon(frame, f));
          }
        }
      }
      RunReport report = summarize_run(records);
      print_summaries(report);
      if (!cmp_out.empty()) {
        save_report_json(report, out_path(cmp_out, "report.json"));
        save_report_csv(report, out_path(cmp_out, "report.csv"));
      }
      return 0;
    }
  } catch (const InsufficientHistoryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InfeasibleScheduleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
