#pragma once

// Hyndman-Ullah functional time-series model and its weighted (HUw) and
// robust (HUrob) variants.

#include "fertcast/arima.hpp"
#include "fertcast/data.hpp"
#include "fertcast/forecast.hpp"
#include "fertcast/smoothing.hpp"

#include <Eigen/Dense>

#include <vector>

namespace fertcast {

enum class WeightKind { Uniform, Geometric };

/// Year weights for the mean function and the principal components, in year
/// order and summing to one.
struct FtsWeights {
  WeightKind kind = WeightKind::Uniform;
  double lambda = 0.0;
  Eigen::VectorXd weights;
};

/// Uniform: 1/n. Geometric: lambda (1 - lambda)^(n - t), renormalized.
FtsWeights make_weights(WeightKind kind, double lambda, int n);

/// Weighted functional principal component decomposition
///   s_t(x) = a(x) + sum_j b_j(x) k_{t,j} + e_t(x).
///
/// Components are orthonormal under the plain dot product over the age grid.
/// Scores and residuals are defined for every year, including years carrying
/// zero weight (the robust variant's trimmed years).
struct FpcaModel {
  std::vector<int> years;
  AgeGrid ages;
  FtsWeights weights;
  int num_components = 0;
  Eigen::VectorXd mean;          // a(x)
  Eigen::MatrixXd components;    // age x J, columns b_j(x)
  Eigen::MatrixXd scores;        // year x J
  Eigen::MatrixXd residuals;     // year x age, e_t(x)
  Eigen::MatrixXd observed;      // year x age, unsmoothed transformed rates
  Eigen::VectorXd resid_var;     // v(x)
  Eigen::VectorXd noise_var_avg;  // average of sigma_t^2(x)
  Eigen::VectorXd mean_var;      // sigma_a^2(x)
  std::vector<int> excluded;     // indices of trimmed years (HUrob)

  int num_years() const noexcept { return static_cast<int>(years.size()); }
  /// a + B k_t for year index t.
  Eigen::VectorXd reconstruct(int t) const;
};

/// Years with zero weight are left out of the mean, the components and the
/// variance terms but still receive scores.
FpcaModel fpca_fit(const SmoothSurface& surface, const FtsWeights& weights, int num_components);

/// Years whose integrated squared residual lies strictly above the empirical
/// `efficiency` quantile (type 7), capped at ceil((1 - efficiency) n) years,
/// the most outlying first. Differences at rounding level (1e-9 of the curve
/// scale) are ties. Returned indices are sorted.
std::vector<int> detect_outlier_years(const FpcaModel& model, double efficiency = 0.95);

enum class HuVariant { HU, HUw, HUrob };

struct HuOptions {
  HuVariant variant = HuVariant::HU;
  int num_components = 6;
  double lambda = 0.2;  // HUw only
  double efficiency = 0.95;  // HUrob only
  SmoothingOptions smoothing;
};

FpcaModel fit_hu(const TransformedPanel& panel, const HuOptions& options);
/// Same, on an already smoothed panel.
FpcaModel fit_hu(const SmoothSurface& surface, const HuOptions& options);

/// Forecasting model for one score series: automatic ARIMA, or a random walk
/// with drift when selection is impossible or fails.
UtsModel fit_score_model(std::span<const double> scores);

struct HuForecast {
  ModelForecast forecast;
  std::vector<UtsModel> score_models;
  Eigen::MatrixXd score_var;  // horizon x age: sum_j b_j(x)^2 u_{h,j}
  Eigen::VectorXd mean_var;
  Eigen::VectorXd resid_var;
  Eigen::VectorXd noise_var;
};

/// Point forecast a(x) + sum_j b_j(x) k_{n+h|n,j}; variance
/// sigma_a^2(x) + sum_j b_j(x)^2 u_{n+h|n,j} + v(x) + mean sigma_t^2(x).
HuForecast forecast_hu(const FpcaModel& model, int horizon, const TransformSpec& spec,
                       double level = 0.8, std::string model_id = "HU");

struct LambdaSearchOptions {
  double grid_step = 0.01;
  /// Held-back tail length; 0 = min(20, n / 3).
  int tail_years = 0;
};

/// Geometric decay parameter for HUw minimizing the rate-scale MAFE of
/// forecasts of a held-back tail of `panel`, averaged over horizons and ages.
double select_hu_lambda(const TransformedPanel& panel, const HuOptions& options,
                        const LambdaSearchOptions& search = {});

}  // namespace fertcast
