#include "fertcast/models.hpp"

#include "fertcast/arima.hpp"
#include "fertcast/averaging.hpp"
#include "fertcast/error.hpp"

#include <algorithm>
#include <cctype>

namespace fertcast {

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::HU: return "HU";
    case ModelId::HUrob: return "HUrob";
    case ModelId::HUw: return "HUw";
    case ModelId::RW: return "RW";
    case ModelId::RWD: return "RWD";
    case ModelId::ARIMA: return "ARIMA";
  }
  return "unknown";
}

ModelId parse_model_id(std::string_view text) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  for (ModelId id : all_models()) {
    if (lower(to_string(id)) == lower(text)) return id;
  }
  throw Error(ErrorCode::UnknownMethod, "unknown model '" + std::string(text) + "'");
}

std::vector<ModelId> all_models() {
  return {ModelId::HU, ModelId::HUrob, ModelId::HUw, ModelId::RW, ModelId::RWD, ModelId::ARIMA};
}

std::vector<std::string> model_names(const std::vector<ModelId>& ids) {
  std::vector<std::string> names;
  for (ModelId id : ids) names.push_back(to_string(id));
  return names;
}

ModelRun run_per_age_model(ModelId id, const TransformedPanel& panel, int horizon, double level) {
  const int n = panel.num_years();
  const int ages = panel.ages.size();
  Eigen::MatrixXd point(horizon, ages);
  Eigen::MatrixXd variance(horizon, ages);
  ModelRun run;
  for (int a = 0; a < ages; ++a) {
    const Eigen::VectorXd col = panel.values.col(a);
    const std::span<const double> series(col.data(), static_cast<std::size_t>(n));
    UtsModel model;
    switch (id) {
      case ModelId::RW: model = fit_rw(series); break;
      case ModelId::RWD: model = fit_rwd(series); break;
      case ModelId::ARIMA:
        try {
          model = select_arima(series);
        } catch (const Error&) {
          model = fit_rwd(series);
        }
        break;
      default: throw Error(ErrorCode::InvalidArgument, to_string(id) + " is not a per-age model");
    }
    const UtsForecast f = forecast_uts(model, series, horizon);
    for (int h = 0; h < horizon; ++h) {
      point(h, a) = f.point[static_cast<std::size_t>(h)];
      variance(h, a) = f.variance[static_cast<std::size_t>(h)];
    }
    const int k = model.parameter_count();
    const int m = static_cast<int>(model.residuals.size());
    run.bic += model_bic(model.residuals, m, k);
    run.n_params += k;
  }
  run.forecast = make_forecast(to_string(id), panel.last_year(), panel.ages, panel.spec, level,
                               std::move(point), std::move(variance));
  return run;
}

ModelRun run_hu_model(ModelId id, const SmoothSurface& surface, const TransformSpec& spec, int horizon,
                      const ModelOptions& options) {
  HuOptions hu;
  hu.num_components = options.num_components;
  hu.lambda = options.hu_lambda;
  hu.efficiency = options.efficiency;
  hu.smoothing = options.smoothing;
  switch (id) {
    case ModelId::HU: hu.variant = HuVariant::HU; break;
    case ModelId::HUrob: hu.variant = HuVariant::HUrob; break;
    case ModelId::HUw: hu.variant = HuVariant::HUw; break;
    default: throw Error(ErrorCode::InvalidArgument, to_string(id) + " is not an HU-family model");
  }
  const FpcaModel fpca = fit_hu(surface, hu);
  HuForecast f = forecast_hu(fpca, horizon, spec, options.level, to_string(id));

  const int n = fpca.num_years();
  const int ages = fpca.ages.size();
  int span = n;
  int params = 1;
  for (const UtsModel& sm : f.score_models) {
    span = std::min(span, static_cast<int>(sm.residuals.size()));
    params += sm.parameter_count();
  }
  // One-step fitted values: each score replaced by its one-step prediction.
  Eigen::MatrixXd resid(span, ages);
  for (int r = 0; r < span; ++r) {
    const int t = n - span + r;
    Eigen::VectorXd fitted = fpca.mean;
    for (int j = 0; j < fpca.num_components; ++j) {
      const UtsModel& sm = f.score_models[static_cast<std::size_t>(j)];
      const double e = sm.residuals[sm.residuals.size() - static_cast<std::size_t>(span) + static_cast<std::size_t>(r)];
      fitted += (fpca.scores(t, j) - e) * fpca.components.col(j);
    }
    resid.row(r) = fpca.observed.row(t) - fitted.transpose();
  }
  ModelRun run;
  run.n_params = params;
  if (span <= params) {
    throw Error(ErrorCode::TooFewYears, to_string(id) + ": too few residual years for BIC");
  }
  for (int a = 0; a < ages; ++a) {
    const Eigen::VectorXd col = resid.col(a);
    const double ss = col.squaredNorm();
    run.bic += span * std::log(std::max(ss / span, kBicVarianceFloor));
  }
  run.bic += std::log(static_cast<double>(span)) * params;
  run.forecast = std::move(f.forecast);
  return run;
}

std::vector<ModelRun> run_models(const std::vector<ModelId>& ids, const TransformedPanel& panel, int horizon,
                                 const ModelOptions& options) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "forecast horizon must be at least 1");
  const bool need_surface = std::any_of(ids.begin(), ids.end(), [](ModelId id) {
    return id == ModelId::HU || id == ModelId::HUrob || id == ModelId::HUw;
  });
  SmoothSurface surface;
  if (need_surface) surface = smooth_panel(panel, options.smoothing);
  std::vector<ModelRun> runs;
  runs.reserve(ids.size());
  for (ModelId id : ids) {
    switch (id) {
      case ModelId::HU:
      case ModelId::HUrob:
      case ModelId::HUw:
        runs.push_back(run_hu_model(id, surface, panel.spec, horizon, options));
        break;
      default:
        runs.push_back(run_per_age_model(id, panel, horizon, options.level));
    }
  }
  return runs;
}

}  // namespace fertcast
