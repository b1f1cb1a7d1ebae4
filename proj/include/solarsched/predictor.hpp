#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "solarsched/errors.hpp"
#include "solarsched/ingest.hpp"

namespace solarsched {

// Coefficients of the diurnal-periodic energy model
//   x(k+1) = alpha1*x(k) + alpha2*x(k-D+1) + beta1*y(k) + w(k)
// where D is the number of sub-hours per day, y is the irradiation channel
// and w is zero-mean process noise.
struct WeightSet {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
};

// Fitted weights plus the noise variances the filter runs with.
struct PredictorModel {
  WeightSet weights;
  double sigma_w_sq = 0.0;  // process noise variance
  double sigma_v_sq = 0.0;  // measurement noise variance
};

enum class FitMethod { Newton, LeastSquares };

struct FitReport {
  WeightSet weights;
  double mean_sq_residual = 0.0;  // objective value at the solution
  int iterations = 0;
  bool converged = false;
  int samples = 0;
};

// Fits the model weights by minimizing the mean squared one-step residual
//   (1/m) * sum over targets tau >= period of
//     (z(tau) - alpha1*z(tau-1) - alpha2*z(tau-period) - beta1*y(tau-1))^2
// Newton with Armijo backtracking started from `init` and plain least
// squares (normal equations) solve the same quadratic and must agree.
// Throws InsufficientHistoryError when the series is shorter than
// period + 1 sub-hours and SingularFitError when the regressors are
// rank-deficient (e.g. an all-zero history, or an irradiation channel
// exactly proportional to the energy channel).
FitReport fit_weights(const SubHourSeries& history, const WeightSet& init,
                      FitMethod method, int period = 48);

// Noise defaults derived from a fit: process variance = mean squared
// residual, measurement variance = 1e-4 * process variance.
PredictorModel model_from_fit(const FitReport& report);

// Augmented filter state over one day of sub-hour energies:
// xi = [x(k), x(k-1), ..., x(k-D+1)]' with covariance P (D x D).
// The stored state is the pre-measurement prediction for the current
// sub-hour; it may go negative, clamping happens at the interface only.
struct KalmanState {
  WeightSet weights;
  double sigma_w_sq = 0.0;
  double sigma_v_sq = 0.0;
  Eigen::VectorXd xi;
  Eigen::MatrixXd P;

  int dim() const { return static_cast<int>(xi.size()); }

  // Initializes the filter at the first sub-hour of a new day from the
  // previous day's D measured energies (chronological order): component 0
  // (the not-yet-measured current sub-hour) is seeded with yesterday's same
  // sub-hour, components j >= 1 hold the true recent history x(-j).
  // P0 = sigma_w_sq * I.
  static KalmanState from_prior_day(const std::vector<double>& prior_day,
                                    const WeightSet& weights,
                                    double sigma_w_sq, double sigma_v_sq);
};

struct KsepStepResult {
  KalmanState state;                  // pre-measurement state for k+1
  double predicted_next_energy_j = 0;  // max(0, xi[0] of the new state)
  double innovation = 0.0;            // z - xi[0] before the update
  double innovation_variance = 0.0;   // P(0,0) + sigma_v_sq
};

// One filter cycle at sub-hour k: measurement update with z (gain
// K = P e1 / (P(0,0) + sigma_v_sq), Joseph-form covariance update,
// symmetrized), then time propagation with irradiation y. When the
// innovation variance is exactly zero the measurement is adopted as exact.
KsepStepResult ksep_step(const KalmanState& state, double irradiation_y,
                         double measured_z);

// Seasonal baseline: the average of the same sub-hour's energies on the two
// previous days. Throws InvalidInputError on negative or non-finite inputs.
double ssep_predict(double same_subhour_prev_day_j,
                    double same_subhour_two_days_ago_j);

// Mean squared prediction error; same units squared as the inputs.
double prediction_mse(const std::vector<double>& real,
                      const std::vector<double>& predicted);

// Runs both predictors over series indices [start_index, start_index+count):
// one-step-ahead filter predictions (warm-started one day early so the
// first evaluated sub-hour has a prediction) and the two-day-average
// baseline. Requires start_index >= 2*period.
struct PredictionEval {
  int start_index = 0;
  std::vector<double> real_j;
  std::vector<double> ksep_j;
  std::vector<double> ssep_j;
};
PredictionEval evaluate_predictors(const SubHourSeries& series,
                                   const PredictorModel& model,
                                   int start_index, int count,
                                   int period = 48);

// key=value serialization: alpha1, alpha2, beta1, sigma_w_sq, sigma_v_sq.
void save_predictor_model(const PredictorModel& model, const std::string& path);
PredictorModel load_predictor_model(const std::string& path);

}  // namespace solarsched
