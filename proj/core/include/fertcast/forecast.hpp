#pragma once

#include "fertcast/data.hpp"

#include <Eigen/Dense>

#include <string>

namespace fertcast {

/// Standard normal quantile at (1 + level) / 2, the multiplier of a central
/// `level` prediction interval.
double interval_multiplier(double level);

/// Point and interval forecasts for horizons 1..H.
///
/// Transformed-scale quantities are what models and combinations operate on;
/// rate-scale point/lower/upper are their images under the inverse transform,
/// so lower <= point <= upper holds elementwise.
struct ModelForecast {
  std::string model_id;
  int origin_year = 0;  // last year of the fitting period
  AgeGrid ages;
  TransformSpec transform;
  double level = 0.8;
  Eigen::MatrixXd point_transformed;     // horizon x age
  Eigen::MatrixXd variance_transformed;  // horizon x age
  Eigen::MatrixXd point;                 // rate scale
  Eigen::MatrixXd lower;
  Eigen::MatrixXd upper;

  int horizons() const noexcept { return static_cast<int>(point.rows()); }
};

/// Builds the Gaussian interval point +/- z sqrt(variance) on the transformed
/// scale and maps everything through the inverse transform.
ModelForecast make_forecast(std::string model_id, int origin_year, const AgeGrid& ages,
                            const TransformSpec& transform, double level,
                            Eigen::MatrixXd point_transformed, Eigen::MatrixXd variance_transformed);

/// Same, with an explicit interval centre (model-averaged intervals are centred
/// on the interval-weighted mean rather than the point forecast).
ModelForecast make_forecast(std::string model_id, int origin_year, const AgeGrid& ages,
                            const TransformSpec& transform, double level,
                            Eigen::MatrixXd point_transformed, Eigen::MatrixXd variance_transformed,
                            const Eigen::MatrixXd& interval_centre);

}  // namespace fertcast
