#pragma once

// Model-averaging weights and the combination of constituent forecasts.

#include "fertcast/forecast.hpp"
#include "fertcast/metrics.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fertcast {

enum class AveragingMethod { Frequentist, Bayesian, MCS, Equal };

/// Lower-case identifier used in file names and on the command line.
std::string to_string(AveragingMethod method);
/// Column label in score tables.
std::string display_name(AveragingMethod method);
/// Accepts the lower-case identifier or the display name; throws UnknownMethod.
AveragingMethod parse_averaging_method(std::string_view text);
std::vector<AveragingMethod> all_averaging_methods();

/// Horizon-specific weights, one row per horizon 1..H and one column per model.
struct WeightTable {
  std::vector<std::string> models;
  Eigen::MatrixXd point;
  Eigen::MatrixXd interval;

  int horizons() const noexcept { return static_cast<int>(point.rows()); }
  int num_models() const noexcept { return static_cast<int>(models.size()); }
  /// Throws InvalidArgument unless shapes agree, entries are non-negative and
  /// every row sums to one within 1e-10.
  void validate() const;

  /// The same point and interval rows at every horizon.
  static WeightTable replicate(std::vector<std::string> models, int horizons,
                               const std::vector<double>& point_row,
                               const std::vector<double>& interval_row);
};

inline constexpr double kScoreFloor = 1e-12;
inline constexpr double kBicVarianceFloor = 1e-300;

/// w_l proportional to 1 / max(score_l, 1e-12).
std::vector<double> inverse_score_weights(std::span<const double> scores);

/// Point weights from MAFE and interval weights from the mean interval score,
/// per horizon, for the listed model columns of `scores`.
WeightTable frequentist_weights(const ScoreTable& scores, const std::vector<std::string>& models);

/// exp(-(BIC_l - min BIC) / 2), normalized.
std::vector<double> bic_weights(std::span<const double> bics);

/// n ln(sigma^2) + ln(n) n_params with sigma^2 = sum(residual^2) / n, floored
/// at 1e-300.
double model_bic(std::span<const double> residuals, int n, int n_params);

std::vector<double> equal_weights(int count);

/// 1/|S| on the survivor indices, 0 elsewhere.
std::vector<double> survivor_weights(std::span<const int> survivors, int count);

double combine_point(std::span<const double> values, std::span<const double> weights);

/// {sum_l w_l sqrt(var_l + (value_l - centre)^2)}^2.
double combine_variance(std::span<const double> values, std::span<const double> variances,
                        std::span<const double> weights, double centre);

struct CombinedForecast {
  ModelForecast forecast;
  std::vector<std::string> models;
  Eigen::MatrixXd point_weights;     // horizon x model, rows actually used
  Eigen::MatrixXd interval_weights;
};

/// Combines on the transformed scale: point from the point weights; interval
/// centred on the interval-weighted mean with the combined variance above.
/// `forecasts` must contain one forecast per model of `weights` (matched by
/// model id) sharing origin, ages, transform, level and horizon count.
CombinedForecast combine_forecasts(const std::vector<ModelForecast>& forecasts,
                                   const WeightTable& weights, const std::string& method_id);

}  // namespace fertcast
