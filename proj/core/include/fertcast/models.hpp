#pragma once

// The six constituent models fitted to one transformed panel.

#include "fertcast/data.hpp"
#include "fertcast/forecast.hpp"
#include "fertcast/ftsa.hpp"
#include "fertcast/smoothing.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fertcast {

enum class ModelId { HU, HUrob, HUw, RW, RWD, ARIMA };

std::string to_string(ModelId id);
/// Case-insensitive; throws UnknownMethod.
ModelId parse_model_id(std::string_view text);
std::vector<ModelId> all_models();
std::vector<std::string> model_names(const std::vector<ModelId>& ids);

struct ModelOptions {
  int num_components = 6;
  double hu_lambda = 0.2;
  double efficiency = 0.95;
  double level = 0.8;
  SmoothingOptions smoothing;
};

struct ModelRun {
  ModelForecast forecast;
  double bic = 0.0;
  int n_params = 0;
};

/// Per-age univariate models: the RW, RWD or auto-ARIMA model of each age's
/// transformed series. ARIMA falls back to RWD where selection fails.
/// BIC sums the per-age BICs.
ModelRun run_per_age_model(ModelId id, const TransformedPanel& panel, int horizon, double level);

/// HU-family forecast plus its BIC on the one-step residuals
///   m_t(x) - a(x) - sum_j b_j(x) (k_tj - e_tj)
/// over the years where every score model has a residual, with
/// n_params = sum_j (score model parameters) + 1.
ModelRun run_hu_model(ModelId id, const SmoothSurface& surface, const TransformSpec& spec,
                      int horizon, const ModelOptions& options);

/// Runs `ids` in order. The panel is smoothed once and shared by the HU family.
std::vector<ModelRun> run_models(const std::vector<ModelId>& ids, const TransformedPanel& panel,
                                 int horizon, const ModelOptions& options);

}  // namespace fertcast
