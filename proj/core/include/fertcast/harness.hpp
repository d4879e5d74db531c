#pragma once

// Two-stage rolling-origin study: stage 1 estimates horizon-specific
// averaging weights from expanding-window errors, stage 2 scores the
// constituent models and the averages on the holdout period.

#include "fertcast/averaging.hpp"
#include "fertcast/data.hpp"
#include "fertcast/mcs.hpp"
#include "fertcast/metrics.hpp"
#include "fertcast/models.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fertcast {

struct StudyDesign {
  int stage1_initial_fit_end = 1971;
  int in_sample_end = 1991;
  int holdout_end = 2011;
  int horizon = 20;
  /// First fitting year for every window; nullopt = each panel's first year.
  std::optional<int> fit_start_year;
  std::vector<ModelId> models = all_models();
  std::vector<AveragingMethod> methods = all_averaging_methods();
  TransformSpec transform;
  int num_components = 6;
  double level = 0.8;
  double efficiency = 0.95;
  SmoothingOptions smoothing;
  McsOptions mcs;
  /// HUw lambda is chosen on the `lambda_window` years ending `lambda_lag`
  /// years before in_sample_end.
  int lambda_window = 22;
  int lambda_lag = 10;
  double lambda_grid_step = 0.01;
  /// Windows whose fitting period is shorter than this are skipped for all
  /// models; 0 = max(num_components + 2, 10).
  int min_fit_years = 0;
  int threads = 1;

  /// Throws InvalidArgument on inconsistent fields.
  void validate() const;
  double interval_alpha() const { return 1.0 - level; }
  int effective_min_fit_years() const;
  ModelOptions model_options(double hu_lambda) const;
};

struct BicRecord {
  std::string country;
  int origin_year = 0;
  std::string model;
  double bic = 0.0;
};

struct WindowInfo {
  std::string country;
  int origin_year = 0;
  int horizons = 0;
};

struct StageOutput {
  std::vector<std::string> columns;  // models, then averaging methods (stage 2)
  ScoreTable scores;
  /// records[c]: error records of column c in task order (country, window,
  /// horizon, age).
  std::vector<std::vector<ErrorRecord>> records;
  std::vector<BicRecord> bics;
  std::vector<WindowInfo> windows;
  std::vector<WindowInfo> skipped;
  std::map<AveragingMethod, WeightTable> weights;  // stage 1 only
  std::vector<McsResult> mcs;  // stage 1, per horizon
  std::map<std::string, double> hu_lambda;
  std::vector<std::string> warnings;

  /// Windows of `country` contributing a forecast at horizon h.
  int window_count(const std::string& country, int horizon) const;
};

/// HUw decay parameter for one country (see StudyDesign::lambda_window).
double estimate_hu_lambda(const RatePanel& panel, const StudyDesign& design);

/// Lambdas for all panels; appends overlap warnings to `warnings` if given.
std::map<std::string, double> estimate_hu_lambdas(const std::vector<RatePanel>& panels,
                                                  const StudyDesign& design,
                                                  std::vector<std::string>* warnings = nullptr);

/// Fit-end years stage1_initial_fit_end..in_sample_end-1, forecasting through
/// in_sample_end. Produces one weight table per configured averaging method.
StageOutput run_stage1(const std::vector<RatePanel>& panels, const StudyDesign& design,
                       const std::map<std::string, double>* hu_lambda = nullptr);

/// Weight tables derived from a stage-1 output.
std::map<AveragingMethod, WeightTable> estimate_weights(const StageOutput& stage1,
                                                        const StudyDesign& design,
                                                        std::vector<McsResult>* mcs_out = nullptr);

/// Fit-end years in_sample_end..holdout_end-1, forecasting through
/// holdout_end; the averages use the supplied stage-1 weights.
StageOutput run_stage2(const std::vector<RatePanel>& panels, const StudyDesign& design,
                       const std::map<AveragingMethod, WeightTable>& weights,
                       const std::map<std::string, double>& hu_lambda);

/// Fits every model on the whole panel (from the design's fit start) and
/// combines H-step forecasts with `weights`.
CombinedForecast forecast_production(const RatePanel& panel, const StudyDesign& design,
                                     const WeightTable& weights, AveragingMethod method, int horizon,
                                     double hu_lambda);

}  // namespace fertcast
