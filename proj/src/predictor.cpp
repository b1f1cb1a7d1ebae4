#include "solarsched/predictor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "kv_file.hpp"

namespace solarsched {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

Eigen::Vector3d weights_to_vec(const WeightSet& w) {
  return Eigen::Vector3d(w.alpha1, w.alpha2, w.beta1);
}

WeightSet vec_to_weights(const Eigen::Vector3d& v) {
  return WeightSet{v(0), v(1), v(2)};
}

}  // namespace

FitReport fit_weights(const SubHourSeries& history, const WeightSet& init,
                      FitMethod method, int period) {
  if (period < 2) throw InvalidInputError("period must be at least 2");
  const std::vector<double> z = history.energies_j();
  const std::vector<double> y = history.irradiations();
  const int len = static_cast<int>(z.size());
  if (len < period + 1) {
    throw InsufficientHistoryError(
        "weight fit needs at least one full day plus one step (" +
        std::to_string(period + 1) + " sub-hours), got " +
        std::to_string(len));
  }

  const int m = len - period;  // targets tau = period .. len-1
  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd t(m);
  for (int i = 0; i < m; ++i) {
    const int tau = period + i;
    X(i, 0) = z[tau - 1];
    X(i, 1) = z[tau - period];
    X(i, 2) = y[tau - 1];
    t(i) = z[tau];
  }

  const Eigen::Matrix3d S = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(S);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
    throw SingularFitError(
        "regressor matrix is rank-deficient; the weights are not identifiable "
        "from this history");
  }

  const auto objective = [&](const Eigen::Vector3d& w) {
    return (X * w - t).squaredNorm() / m;
  };

  FitReport report;
  if (method == FitMethod::LeastSquares) {
    Eigen::Vector3d w = S.ldlt().solve(X.transpose() * t);
    report.weights = vec_to_weights(w);
    report.mean_sq_residual = objective(w);
    report.iterations = 0;
    report.converged = true;
  } else {
    Eigen::Vector3d w = weights_to_vec(init);
    const Eigen::Matrix3d H = S * (2.0 / m);
    const auto hess = H.ldlt();
    double f = objective(w);
    const double gtol = 1e-12 * std::max(1.0, lmax * 2.0 / m);
    bool converged = false;
    int iter = 0;
    for (; iter < 50; ++iter) {
      const Eigen::Vector3d g = X.transpose() * (X * w - t) * (2.0 / m);
      if (g.lpNorm<Eigen::Infinity>() <= gtol) {
        converged = true;
        break;
      }
      const Eigen::Vector3d d = hess.solve(-g);
      double step = 1.0;
      const double slope = g.dot(d);
      double f_new = objective(w + step * d);
      int halvings = 0;
      while (f_new > f + 1e-4 * step * slope && halvings < 60) {
        step *= 0.5;
        f_new = objective(w + step * d);
        ++halvings;
      }
      w += step * d;
      f = f_new;
    }
    report.weights = vec_to_weights(w);
    report.mean_sq_residual = f;
    report.iterations = iter;
    report.converged = converged;
  }
  report.samples = m;
  return report;
}

PredictorModel model_from_fit(const FitReport& report) {
  PredictorModel model;
  model.weights = report.weights;
  model.sigma_w_sq = report.mean_sq_residual;
  model.sigma_v_sq = 1e-4 * report.mean_sq_residual;
  return model;
}

KalmanState KalmanState::from_prior_day(const std::vector<double>& prior_day,
                                        const WeightSet& weights,
                                        double sigma_w_sq, double sigma_v_sq) {
  const int d = static_cast<int>(prior_day.size());
  if (d < 2) {
    throw InvalidInputError("prior day must contain at least 2 sub-hours");
  }
  if (!(sigma_w_sq >= 0.0) || !(sigma_v_sq >= 0.0)) {
    throw InvalidInputError("noise variances must be nonnegative");
  }
  for (double v : prior_day) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("prior day energies must be finite");
    }
  }
  KalmanState s;
  s.weights = weights;
  s.sigma_w_sq = sigma_w_sq;
  s.sigma_v_sq = sigma_v_sq;
  s.xi = Eigen::VectorXd(d);
  s.xi(0) = prior_day[0];  // diurnal prior for the unmeasured current sub-hour
  for (int j = 1; j < d; ++j) s.xi(j) = prior_day[d - j];
  s.P = sigma_w_sq * Eigen::MatrixXd::Identity(d, d);
  return s;
}

KsepStepResult ksep_step(const KalmanState& state, double irradiation_y,
                         double measured_z) {
  if (!std::isfinite(irradiation_y) || !std::isfinite(measured_z)) {
    throw InvalidInputError("filter inputs must be finite");
  }
  const int d = state.dim();
  if (d < 2 || state.P.rows() != d || state.P.cols() != d) {
    throw InvalidInputError("filter state is not initialized");
  }

  KsepStepResult out;
  out.innovation = measured_z - state.xi(0);
  out.innovation_variance = state.P(0, 0) + state.sigma_v_sq;

  // Measurement update, H = [1 0 ... 0].
  Eigen::VectorXd xi = state.xi;
  Eigen::MatrixXd P = state.P;
  if (out.innovation_variance > 0.0) {
    const Eigen::VectorXd K = P.col(0) / out.innovation_variance;
    xi += K * out.innovation;
    // Joseph form: (I - K e1') P (I - K e1')' + sigma_v^2 K K'.
    Eigen::MatrixXd MP = P - K * P.row(0);
    P = MP - MP.col(0) * K.transpose() + state.sigma_v_sq * K * K.transpose();
  } else {
    // Degenerate case: zero prior and measurement variance. Adopt the
    // measurement as exact; the first component's uncertainty stays zero.
    xi(0) = measured_z;
    P.row(0).setZero();
    P.col(0).setZero();
  }
  P = 0.5 * (P + P.transpose()).eval();

  // Time propagation. A is the companion form of the diurnal model:
  // row 0 = alpha1*e1' + alpha2*eD', rows below shift the state down.
  const double a1 = state.weights.alpha1;
  const double a2 = state.weights.alpha2;
  KalmanState next;
  next.weights = state.weights;
  next.sigma_w_sq = state.sigma_w_sq;
  next.sigma_v_sq = state.sigma_v_sq;

  next.xi = Eigen::VectorXd(d);
  next.xi(0) = a1 * xi(0) + a2 * xi(d - 1) + state.weights.beta1 * irradiation_y;
  next.xi.tail(d - 1) = xi.head(d - 1);

  Eigen::MatrixXd AP(d, d);
  AP.row(0) = a1 * P.row(0) + a2 * P.row(d - 1);
  AP.bottomRows(d - 1) = P.topRows(d - 1);
  Eigen::MatrixXd APA(d, d);
  APA.col(0) = a1 * AP.col(0) + a2 * AP.col(d - 1);
  APA.rightCols(d - 1) = AP.leftCols(d - 1);
  APA(0, 0) += state.sigma_w_sq;
  next.P = 0.5 * (APA + APA.transpose());

  out.state = std::move(next);
  out.predicted_next_energy_j = std::max(0.0, out.state.xi(0));
  return out;
}

double ssep_predict(double same_subhour_prev_day_j,
                    double same_subhour_two_days_ago_j) {
  if (!std::isfinite(same_subhour_prev_day_j) ||
      !std::isfinite(same_subhour_two_days_ago_j) ||
      same_subhour_prev_day_j < 0.0 || same_subhour_two_days_ago_j < 0.0) {
    throw InvalidInputError(
        "seasonal prediction needs nonnegative finite prior-day energies");
  }
  return 0.5 * (same_subhour_prev_day_j + same_subhour_two_days_ago_j);
}

double prediction_mse(const std::vector<double>& real,
                      const std::vector<double>& predicted) {
  if (real.empty() || real.size() != predicted.size()) {
    throw InvalidInputError(
        "MSE needs two non-empty series of identical length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const double d = real[i] - predicted[i];
    acc += d * d;
  }
  return acc / static_cast<double>(real.size());
}

PredictionEval evaluate_predictors(const SubHourSeries& series,
                                   const PredictorModel& model,
                                   int start_index, int count, int period) {
  const int len = series.size();
  if (start_index < 2 * period) {
    throw InsufficientHistoryError(
        "predictor evaluation needs two full days of history before the "
        "evaluation window");
  }
  if (count < 1 || start_index + count > len) {
    throw InvalidInputError("evaluation window is outside the series");
  }
  const std::vector<double> z = series.energies_j();
  const std::vector<double> y = series.irradiations();

  PredictionEval eval;
  eval.start_index = start_index;
  eval.real_j.assign(z.begin() + start_index, z.begin() + start_index + count);

  eval.ssep_j.reserve(count);
  for (int s = start_index; s < start_index + count; ++s) {
    eval.ssep_j.push_back(ssep_predict(z[s - period], z[s - 2 * period]));
  }

  // Warm-start the filter one day early so index start_index already has a
  // one-step-ahead prediction.
  const int warm = start_index - period;
  std::vector<double> prior(z.begin() + (warm - period), z.begin() + warm);
  KalmanState state = KalmanState::from_prior_day(
      prior, model.weights, model.sigma_w_sq, model.sigma_v_sq);
  eval.ksep_j.resize(count);
  for (int s = warm; s < start_index + count - 1; ++s) {
    KsepStepResult step = ksep_step(state, y[s], z[s]);
    state = std::move(step.state);
    const int target = s + 1;
    if (target >= start_index) {
      eval.ksep_j[target - start_index] = step.predicted_next_energy_j;
    }
  }
  return eval;
}

void save_predictor_model(const PredictorModel& model,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write weights file: " + path);
  out << "alpha1=" << fmt_double(model.weights.alpha1) << "\n";
  out << "alpha2=" << fmt_double(model.weights.alpha2) << "\n";
  out << "beta1=" << fmt_double(model.weights.beta1) << "\n";
  out << "sigma_w_sq=" << fmt_double(model.sigma_w_sq) << "\n";
  out << "sigma_v_sq=" << fmt_double(model.sigma_v_sq) << "\n";
}

PredictorModel load_predictor_model(const std::string& path) {
  PredictorModel model;
  bool have[5] = {false, false, false, false, false};
  for (const auto& e : detail::parse_kv_file(path)) {
    if (e.key == "alpha1") {
      model.weights.alpha1 = detail::kv_to_double(e);
      have[0] = true;
    } else if (e.key == "alpha2") {
      model.weights.alpha2 = detail::kv_to_double(e);
      have[1] = true;
    } else if (e.key == "beta1") {
      model.weights.beta1 = detail::kv_to_double(e);
      have[2] = true;
    } else if (e.key == "sigma_w_sq") {
      model.sigma_w_sq = detail::kv_to_double(e);
      have[3] = true;
    } else if (e.key == "sigma_v_sq") {
      model.sigma_v_sq = detail::kv_to_double(e);
      have[4] = true;
    } else {
      throw ParseError("unknown weights key '" + e.key + "'", e.line);
    }
  }
  for (bool h : have) {
    if (!h) {
      throw ParseError(
          "weights file must define alpha1, alpha2, beta1, sigma_w_sq, "
          "sigma_v_sq",
          0);
    }
  }
  return model;
}

}  // namespace solarsched
