#include "fertcast/ftsa.hpp"

#include "fertcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fertcast {

FtsWeights make_weights(WeightKind kind, double lambda, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "weights need at least one year");
  FtsWeights w;
  w.kind = kind;
  w.weights.resize(n);
  if (kind == WeightKind::Uniform) {
    w.weights.setConstant(1.0 / n);
    return w;
  }
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::BadLambda, "lambda must lie in (0, 1)");
  w.lambda = lambda;
  for (int t = 1; t <= n; ++t) w.weights(t - 1) = lambda * std::pow(1.0 - lambda, n - t);
  w.weights /= w.weights.sum();
  return w;
}

Eigen::VectorXd FpcaModel::reconstruct(int t) const {
  return mean + components * scores.row(t).transpose();
}

FpcaModel fpca_fit(const SmoothSurface& surface, const FtsWeights& weights, int num_components) {
  const int n = surface.num_years();
  const int p = surface.ages.size();
  if (weights.weights.size() != n) throw Error(ErrorCode::LengthMismatch, "one weight per year required");
  if (num_components < 1 || num_components > p) {
    throw Error(ErrorCode::InvalidArgument, "number of components must lie in [1, ages]");
  }
  const Eigen::VectorXd& w = weights.weights;
  const int active = static_cast<int>((w.array() > 0.0).count());
  if (active < num_components + 1) {
    throw Error(ErrorCode::TooFewYears, std::to_string(active) + " weighted years cannot support " +
                                            std::to_string(num_components) + " components");
  }
  const double total = w.sum();

  FpcaModel m;
  m.years = surface.years;
  m.ages = surface.ages;
  m.weights = weights;
  m.num_components = num_components;
  m.observed = surface.observed;
  m.mean = (surface.smooth.transpose() * w) / total;

  Eigen::MatrixXd centered = surface.smooth.rowwise() - m.mean.transpose();
  Eigen::MatrixXd scaled = centered;
  for (int t = 0; t < n; ++t) scaled.row(t) *= std::sqrt(w(t) / total);
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
  if (svd.matrixV().cols() < num_components) {
    throw Error(ErrorCode::TooFewYears, "not enough data for the requested components");
  }
  m.components = svd.matrixV().leftCols(num_components);
  for (int j = 0; j < num_components; ++j) {
    if (m.components.col(j).sum() < 0.0) m.components.col(j) *= -1.0;
  }
  m.scores = centered * m.components;
  m.residuals = centered - m.scores * m.components.transpose();

  m.resid_var = Eigen::VectorXd::Zero(p);
  m.noise_var_avg = Eigen::VectorXd::Zero(p);
  for (int t = 0; t < n; ++t) {
    if (w(t) <= 0.0) {
      m.excluded.push_back(t);
      continue;
    }
    m.resid_var += m.residuals.row(t).transpose().cwiseAbs2();
    m.noise_var_avg += surface.noise_var.row(t).transpose();
  }
  m.resid_var /= active;
  m.noise_var_avg /= active;

  const Eigen::VectorXd raw_mean = (surface.observed.transpose() * w) / total;
  m.mean_var = (raw_mean - m.mean).cwiseAbs2();
  return m;
}

std::vector<int> detect_outlier_years(const FpcaModel& model, double efficiency) {
  if (!(efficiency > 0.0 && efficiency < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "efficiency must lie in (0, 1)");
  }
  const int n = model.num_years();
  std::vector<double> ise(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) ise[static_cast<std::size_t>(t)] = model.residuals.row(t).squaredNorm();

  std::vector<double> sorted = ise;
  std::sort(sorted.begin(), sorted.end());
  const double pos = efficiency * (n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double threshold = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  const auto cap = static_cast<std::size_t>(std::ceil((1.0 - efficiency) * n - 1e-9));

  // Values within rounding of the threshold count as ties, relative to the
  // larger of the threshold and the mean squared size of the centred curves.
  double scale = threshold;
  if (model.scores.rows() == n) {
    double total = 0.0;
    for (int t = 0; t < n; ++t) total += model.scores.row(t).squaredNorm() + ise[static_cast<std::size_t>(t)];
    scale = std::max(scale, total / n);
  }
  const double tolerance = 1e-9 * scale;

  std::vector<int> flagged;
  for (int t = 0; t < n; ++t) {
    if (ise[static_cast<std::size_t>(t)] > threshold + tolerance) flagged.push_back(t);
  }
  if (flagged.size() > cap) {
    std::stable_sort(flagged.begin(), flagged.end(), [&](int a, int b) {
      return ise[static_cast<std::size_t>(a)] > ise[static_cast<std::size_t>(b)];
    });
    flagged.resize(cap);
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

FpcaModel fit_hu(const SmoothSurface& surface, const HuOptions& options) {
  const int n = surface.num_years();
  if (n <= options.num_components) {
    throw Error(ErrorCode::TooFewYears, std::to_string(n) + " years cannot support " +
                                            std::to_string(options.num_components) + " components");
  }
  switch (options.variant) {
    case HuVariant::HU:
      return fpca_fit(surface, make_weights(WeightKind::Uniform, 0.0, n), options.num_components);
    case HuVariant::HUw:
      return fpca_fit(surface, make_weights(WeightKind::Geometric, options.lambda, n),
                      options.num_components);
    case HuVariant::HUrob: {
      const FtsWeights uniform = make_weights(WeightKind::Uniform, 0.0, n);
      FpcaModel first = fpca_fit(surface, uniform, options.num_components);
      const std::vector<int> outliers = detect_outlier_years(first, options.efficiency);
      if (outliers.empty()) return first;
      FtsWeights trimmed = uniform;
      for (int t : outliers) trimmed.weights(t) = 0.0;
      trimmed.weights /= trimmed.weights.sum();
      return fpca_fit(surface, trimmed, options.num_components);
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown HU variant");
}

FpcaModel fit_hu(const TransformedPanel& panel, const HuOptions& options) {
  return fit_hu(smooth_panel(panel, options.smoothing), options);
}

UtsModel fit_score_model(std::span<const double> scores) {
  try {
    return select_arima(scores);
  } catch (const Error&) {
    return fit_rwd(scores);
  }
}

HuForecast forecast_hu(const FpcaModel& model, int horizon, const TransformSpec& spec, double level,
                       std::string model_id) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "forecast horizon must be at least 1");
  const int p = model.ages.size();
  const int n_comp = model.num_components;

  HuForecast out;
  out.mean_var = model.mean_var;
  out.resid_var = model.resid_var;
  out.noise_var = model.noise_var_avg;
  out.score_var = Eigen::MatrixXd::Zero(horizon, p);

  Eigen::MatrixXd point = model.mean.transpose().replicate(horizon, 1);
  for (int j = 0; j < n_comp; ++j) {
    const Eigen::VectorXd series = model.scores.col(j);
    const std::span<const double> s(series.data(), static_cast<std::size_t>(series.size()));
    UtsModel sm = fit_score_model(s);
    const UtsForecast f = forecast_uts(sm, s, horizon);
    const Eigen::VectorXd b = model.components.col(j);
    for (int h = 0; h < horizon; ++h) {
      point.row(h) += f.point[static_cast<std::size_t>(h)] * b.transpose();
      out.score_var.row(h) += f.variance[static_cast<std::size_t>(h)] * b.cwiseAbs2().transpose();
    }
    out.score_models.push_back(std::move(sm));
  }
  const Eigen::RowVectorXd constant_terms = (model.mean_var + model.resid_var + model.noise_var_avg).transpose();
  Eigen::MatrixXd variance = out.score_var.rowwise() + constant_terms;
  out.forecast = make_forecast(std::move(model_id), model.years.back(), model.ages, spec, level,
                               std::move(point), std::move(variance));
  return out;
}

double select_hu_lambda(const TransformedPanel& panel, const HuOptions& options,
                        const LambdaSearchOptions& search) {
  const int n = panel.num_years();
  const int tail = search.tail_years > 0 ? search.tail_years : std::min(20, n / 3);
  const int fit_years = n - tail;
  if (tail < 1 || fit_years <= options.num_components) {
    throw Error(ErrorCode::TooFewYears, "panel too short to select lambda");
  }
  const SmoothSurface surface = smooth_panel(panel.head(fit_years), options.smoothing);
  const Eigen::MatrixXd actual =
      inv_boxcox(Eigen::MatrixXd(panel.values.bottomRows(tail)), panel.spec);

  HuOptions trial = options;
  trial.variant = HuVariant::HUw;
  double best_lambda = 0.0;
  double best_mafe = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::round(1.0 / search.grid_step));
  for (int i = 1; i < steps; ++i) {
    trial.lambda = i * search.grid_step;
    const FpcaModel model = fit_hu(surface, trial);
    const HuForecast f = forecast_hu(model, tail, panel.spec, 0.8, "HUw");
    const double mafe = (f.forecast.point - actual).cwiseAbs().mean();
    if (mafe < best_mafe) {
      best_mafe = mafe;
      best_lambda = trial.lambda;
    }
  }
  return best_lambda;
}

}  // namespace fertcast
