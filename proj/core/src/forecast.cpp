#include "fertcast/forecast.hpp"

#include "fertcast/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace fertcast {

double interval_multiplier(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "interval level must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 * (1.0 + level));
}

ModelForecast make_forecast(std::string model_id, int origin_year, const AgeGrid& ages,
                            const TransformSpec& transform, double level,
                            Eigen::MatrixXd point_transformed, Eigen::MatrixXd variance_transformed) {
  const Eigen::MatrixXd centre = point_transformed;
  return make_forecast(std::move(model_id), origin_year, ages, transform, level,
                       std::move(point_transformed), std::move(variance_transformed), centre);
}

ModelForecast make_forecast(std::string model_id, int origin_year, const AgeGrid& ages,
                            const TransformSpec& transform, double level,
                            Eigen::MatrixXd point_transformed, Eigen::MatrixXd variance_transformed,
                            const Eigen::MatrixXd& interval_centre) {
  if (point_transformed.rows() != variance_transformed.rows() ||
      point_transformed.cols() != variance_transformed.cols() ||
      point_transformed.cols() != ages.size() || interval_centre.rows() != point_transformed.rows() ||
      interval_centre.cols() != point_transformed.cols()) {
    throw Error(ErrorCode::LengthMismatch, "forecast matrices disagree in shape");
  }
  if ((variance_transformed.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "negative forecast variance");
  }
  const double z = interval_multiplier(level);
  const Eigen::MatrixXd half = z * variance_transformed.cwiseSqrt();

  ModelForecast f;
  f.model_id = std::move(model_id);
  f.origin_year = origin_year;
  f.ages = ages;
  f.transform = transform;
  f.level = level;
  f.point = inv_boxcox(point_transformed, transform);
  f.lower = inv_boxcox(interval_centre - half, transform);
  f.upper = inv_boxcox(interval_centre + half, transform);
  // An off-centre interval may not bracket the point forecast; widen it.
  f.lower = f.lower.cwiseMin(f.point);
  f.upper = f.upper.cwiseMax(f.point);
  f.point_transformed = std::move(point_transformed);
  f.variance_transformed = std::move(variance_transformed);
  return f;
}

}  // namespace fertcast
