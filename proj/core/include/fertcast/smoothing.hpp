#pragma once

#include "fertcast/data.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace fertcast {

struct YearSmooth {
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;  // observed - fitted
  double penalty = 0.0;       // the penalty actually used
};

/// Natural cubic smoothing spline with a knot at every age.
///
/// Minimizes |y - g|^2 + penalty * g' K g, where K = Q R^-1 Q' is the
/// integrated squared second-derivative penalty in Reinsch form. K depends only
/// on the ages, so its eigendecomposition is computed once and reused; each fit
/// is then O(p^2). A penalty of nullopt selects it by generalized
/// cross-validation.
class SplineSmoother {
 public:
  explicit SplineSmoother(const AgeGrid& ages);

  YearSmooth fit(const Eigen::VectorXd& curve, std::optional<double> penalty = std::nullopt) const;

  double gcv(const Eigen::VectorXd& curve, double penalty) const;
  const AgeGrid& ages() const noexcept { return ages_; }

 private:
  Eigen::VectorXd fit_coefficients(const Eigen::VectorXd& coef, double penalty) const;
  double select_penalty(const Eigen::VectorXd& coef) const;

  AgeGrid ages_;
  Eigen::MatrixXd basis_;       // eigenvectors of K
  Eigen::VectorXd eigenvalues_;  // eigenvalues of K, null space set to exactly 0
};

/// One year's curve; see SplineSmoother.
YearSmooth smooth_year(const Eigen::VectorXd& curve, const AgeGrid& ages,
                       std::optional<double> penalty = std::nullopt);

inline constexpr double kNoiseVarianceFloor = 1e-12;

/// Per year, a centered moving average over age of squared residuals, with the
/// window truncated at the ends of the age range and floored at 1e-12.
Eigen::MatrixXd estimate_noise_variance(const Eigen::MatrixXd& residuals, int window = 5);

struct SmoothingOptions {
  std::optional<double> penalty;  // nullopt = GCV
  int noise_window = 5;
};

struct SmoothSurface {
  std::vector<int> years;
  AgeGrid ages;
  Eigen::MatrixXd observed;   // transformed rates m_t(x)
  Eigen::MatrixXd smooth;     // s_t(x)
  Eigen::MatrixXd noise_var;  // sigma_t^2(x)

  int num_years() const noexcept { return static_cast<int>(years.size()); }
};

SmoothSurface smooth_panel(const TransformedPanel& panel, const SmoothingOptions& options = {});

}  // namespace fertcast
