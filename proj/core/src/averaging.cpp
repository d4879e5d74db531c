#include "fertcast/averaging.hpp"

#include "fertcast/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace fertcast {

namespace {

void check_weight_matrix(const Eigen::MatrixXd& w, int models, const char* what) {
  if (w.cols() != models) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " weights have the wrong number of columns");
  }
  for (int h = 0; h < w.rows(); ++h) {
    if ((w.row(h).array() < 0.0).any() || !w.row(h).allFinite()) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " weights must be finite and non-negative");
    }
    if (std::abs(w.row(h).sum() - 1.0) > 1e-10) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(what) + " weights at horizon " + std::to_string(h + 1) + " do not sum to one");
    }
  }
}

Eigen::RowVectorXd to_row(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_string(AveragingMethod method) {
  switch (method) {
    case AveragingMethod::Frequentist: return "frequentist";
    case AveragingMethod::Bayesian: return "bayesian";
    case AveragingMethod::MCS: return "mcs";
    case AveragingMethod::Equal: return "equal";
  }
  return "unknown";
}

std::string display_name(AveragingMethod method) {
  switch (method) {
    case AveragingMethod::Frequentist: return "Frequentist";
    case AveragingMethod::Bayesian: return "Bayesian";
    case AveragingMethod::MCS: return "MCS";
    case AveragingMethod::Equal: return "Equal";
  }
  return "Unknown";
}

AveragingMethod parse_averaging_method(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (AveragingMethod m : all_averaging_methods()) {
    if (lower == to_string(m)) return m;
  }
  throw Error(ErrorCode::UnknownMethod, "unknown averaging method '" + std::string(text) + "'");
}

std::vector<AveragingMethod> all_averaging_methods() {
  return {AveragingMethod::Frequentist, AveragingMethod::Bayesian, AveragingMethod::MCS,
          AveragingMethod::Equal};
}

void WeightTable::validate() const {
  if (models.empty()) throw Error(ErrorCode::InvalidArgument, "weight table has no models");
  if (point.rows() != interval.rows()) {
    throw Error(ErrorCode::InvalidArgument, "point and interval weights cover different horizons");
  }
  check_weight_matrix(point, num_models(), "point");
  check_weight_matrix(interval, num_models(), "interval");
}

WeightTable WeightTable::replicate(std::vector<std::string> models, int horizons,
                                   const std::vector<double>& point_row,
                                   const std::vector<double>& interval_row) {
  WeightTable t;
  t.models = std::move(models);
  t.point = to_row(point_row).replicate(horizons, 1);
  t.interval = to_row(interval_row).replicate(horizons, 1);
  t.validate();
  return t;
}

std::vector<double> inverse_score_weights(std::span<const double> scores) {
  std::vector<double> w(scores.size());
  std::transform(scores.begin(), scores.end(), w.begin(),
                 [](double s) { return 1.0 / std::max(s, kScoreFloor); });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

WeightTable frequentist_weights(const ScoreTable& scores, const std::vector<std::string>& models) {
  const int horizons = scores.horizons();
  const int count = static_cast<int>(models.size());
  WeightTable t;
  t.models = models;
  t.point.resize(horizons, count);
  t.interval.resize(horizons, count);
  std::vector<double> point(static_cast<std::size_t>(count));
  std::vector<double> interval(static_cast<std::size_t>(count));
  for (int h = 1; h <= horizons; ++h) {
    for (int l = 0; l < count; ++l) {
      const int col = scores.column_index(models[static_cast<std::size_t>(l)]);
      point[static_cast<std::size_t>(l)] = scores.mafe(h, col);
      interval[static_cast<std::size_t>(l)] = scores.mean_interval_score(h, col);
    }
    t.point.row(h - 1) = to_row(inverse_score_weights(point));
    t.interval.row(h - 1) = to_row(inverse_score_weights(interval));
  }
  return t;
}

std::vector<double> bic_weights(std::span<const double> bics) {
  if (bics.empty()) throw Error(ErrorCode::InvalidArgument, "no BIC values");
  const double best = *std::min_element(bics.begin(), bics.end());
  if (!std::isfinite(best)) throw Error(ErrorCode::NonNumericValue, "BIC values must be finite");
  std::vector<double> w(bics.size());
  std::transform(bics.begin(), bics.end(), w.begin(), [&](double b) {
    if (std::isnan(b)) throw Error(ErrorCode::NonNumericValue, "BIC values must be finite");
    return std::exp(-(b - best) / 2.0);
  });
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  return w;
}

double model_bic(std::span<const double> residuals, int n, int n_params) {
  if (n <= n_params || n < 1) {
    throw Error(ErrorCode::InvalidArgument, "BIC needs more observations than parameters");
  }
  double ss = 0.0;
  for (double e : residuals) ss += e * e;
  const double sigma2 = std::max(ss / n, kBicVarianceFloor);
  return n * std::log(sigma2) + std::log(static_cast<double>(n)) * n_params;
}

std::vector<double> equal_weights(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "equal weights need at least one model");
  return std::vector<double>(static_cast<std::size_t>(count), 1.0 / count);
}

std::vector<double> survivor_weights(std::span<const int> survivors, int count) {
  if (survivors.empty()) throw Error(ErrorCode::InvalidArgument, "empty survivor set");
  std::vector<double> w(static_cast<std::size_t>(count), 0.0);
  for (int s : survivors) {
    if (s < 0 || s >= count) throw Error(ErrorCode::InvalidArgument, "survivor index out of range");
    w[static_cast<std::size_t>(s)] = 1.0 / static_cast<double>(survivors.size());
  }
  return w;
}

double combine_point(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw Error(ErrorCode::LengthMismatch, "one weight per forecast");
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

double combine_variance(std::span<const double> values, std::span<const double> variances,
                        std::span<const double> weights, double centre) {
  if (values.size() != weights.size() || variances.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "one weight and variance per forecast");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (variances[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "negative forecast variance");
    const double bias = values[i] - centre;
    s += weights[i] * std::sqrt(variances[i] + bias * bias);
  }
  return s * s;
}

CombinedForecast combine_forecasts(const std::vector<ModelForecast>& forecasts,
                                   const WeightTable& weights, const std::string& method_id) {
  weights.validate();
  const int count = weights.num_models();
  std::vector<const ModelForecast*> ordered;
  for (const std::string& id : weights.models) {
    const auto it = std::find_if(forecasts.begin(), forecasts.end(),
                                 [&](const ModelForecast& f) { return f.model_id == id; });
    if (it == forecasts.end()) {
      throw Error(ErrorCode::IncompatibleForecasts, "no forecast for model '" + id + "'");
    }
    ordered.push_back(&*it);
  }
  const ModelForecast& first = *ordered.front();
  const int horizons = first.horizons();
  const int ages = first.ages.size();
  for (const ModelForecast* f : ordered) {
    if (f->horizons() != horizons || !(f->ages == first.ages) || f->origin_year != first.origin_year ||
        f->transform.kappa != first.transform.kappa || f->level != first.level) {
      throw Error(ErrorCode::IncompatibleForecasts, "forecast '" + f->model_id + "' does not match '" +
                                                        first.model_id + "'");
    }
  }
  if (weights.horizons() < horizons) {
    throw Error(ErrorCode::IncompatibleForecasts, "weights cover " + std::to_string(weights.horizons()) +
                                                      " horizons, forecasts need " + std::to_string(horizons));
  }

  Eigen::MatrixXd point(horizons, ages);
  Eigen::MatrixXd centre(horizons, ages);
  Eigen::MatrixXd variance(horizons, ages);
  std::vector<double> values(static_cast<std::size_t>(count));
  std::vector<double> vars(static_cast<std::size_t>(count));
  std::vector<double> wp(static_cast<std::size_t>(count));
  std::vector<double> wi(static_cast<std::size_t>(count));
  for (int h = 0; h < horizons; ++h) {
    for (int l = 0; l < count; ++l) {
      wp[static_cast<std::size_t>(l)] = weights.point(h, l);
      wi[static_cast<std::size_t>(l)] = weights.interval(h, l);
    }
    for (int a = 0; a < ages; ++a) {
      for (int l = 0; l < count; ++l) {
        values[static_cast<std::size_t>(l)] = ordered[static_cast<std::size_t>(l)]->point_transformed(h, a);
        vars[static_cast<std::size_t>(l)] = ordered[static_cast<std::size_t>(l)]->variance_transformed(h, a);
      }
      point(h, a) = combine_point(values, wp);
      centre(h, a) = combine_point(values, wi);
      variance(h, a) = combine_variance(values, vars, wi, centre(h, a));
    }
  }

  CombinedForecast out;
  out.models = weights.models;
  out.point_weights = weights.point.topRows(horizons);
  out.interval_weights = weights.interval.topRows(horizons);
  out.forecast = make_forecast(method_id, first.origin_year, first.ages, first.transform, first.level,
                               std::move(point), std::move(variance), centre);
  return out;
}

}  // namespace fertcast
