#include "fertcast/harness.hpp"

#include "fertcast/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fertcast {

namespace {

struct Task {
  std::size_t panel = 0;
  int origin = 0;
};

struct TaskResult {
  bool skipped = false;
  std::vector<ModelRun> runs;
  std::vector<ModelForecast> combined;  // one per averaging method (stage 2)
  Eigen::MatrixXd actual;               // horizon x age, rate scale
};

int fit_start(const RatePanel& panel, const StudyDesign& design) {
  return design.fit_start_year ? std::max(*design.fit_start_year, panel.first_year()) : panel.first_year();
}

void require_coverage(const RatePanel& panel, int first, int last) {
  if (panel.first_year() > first || panel.last_year() < last) {
    throw Error(ErrorCode::InsufficientHistory,
                panel.country() + ": data cover " + std::to_string(panel.first_year()) + "-" +
                    std::to_string(panel.last_year()) + ", the design needs " + std::to_string(first) + "-" +
                    std::to_string(last));
  }
}

TaskResult run_task(const RatePanel& panel, int origin, int target_end, const StudyDesign& design,
                    double lambda, const std::map<AveragingMethod, WeightTable>* weights) {
  TaskResult out;
  const int start = fit_start(panel, design);
  if (origin - start + 1 < design.effective_min_fit_years()) {
    out.skipped = true;
    return out;
  }
  const int horizon = target_end - origin;
  try {
    const TransformedPanel fit = boxcox(panel.slice(start, origin), design.transform);
    out.runs = run_models(design.models, fit, horizon, design.model_options(lambda));
    out.actual = panel.slice(origin + 1, target_end).rates();
    if (weights != nullptr) {
      std::vector<ModelForecast> forecasts;
      for (const ModelRun& r : out.runs) forecasts.push_back(r.forecast);
      for (AveragingMethod m : design.methods) {
        out.combined.push_back(combine_forecasts(forecasts, weights->at(m), display_name(m)).forecast);
      }
    }
  } catch (const Error& e) {
    throw Error(e.code(), panel.country() + " window ending " + std::to_string(origin) + ": " + e.what());
  }
  return out;
}

StageOutput run_windows(const std::vector<RatePanel>& panels, const StudyDesign& design, int first_origin,
                        int target_end, const std::map<std::string, double>& lambdas,
                        const std::map<AveragingMethod, WeightTable>* weights) {
  design.validate();
  if (panels.empty()) throw Error(ErrorCode::InvalidArgument, "no panels");
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    require_coverage(panels[p], fit_start(panels[p], design), target_end);
    if (!(panels[p].ages() == panels.front().ages())) {
      throw Error(ErrorCode::InvalidArgument, "all panels must share one age grid");
    }
    for (int origin = first_origin; origin < target_end; ++origin) tasks.push_back({p, origin});
  }

  std::vector<TaskResult> results(tasks.size());
  detail::parallel_for(static_cast<int>(tasks.size()), design.threads, [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    const RatePanel& panel = panels[t.panel];
    const auto it = lambdas.find(panel.country());
    const double lambda = it != lambdas.end() ? it->second : design.model_options(0.2).hu_lambda;
    results[static_cast<std::size_t>(i)] = run_task(panel, t.origin, target_end, design, lambda, weights);
  });

  std::vector<std::string> columns = model_names(design.models);
  if (weights != nullptr) {
    for (AveragingMethod m : design.methods) columns.push_back(display_name(m));
  }
  const int max_h = target_end - first_origin;
  StageOutput out{columns, ScoreTable(columns, max_h), {}, {}, {}, {}, {}, {}, lambdas, {}};
  out.records.resize(columns.size());
  const double alpha = design.interval_alpha();
  const AgeGrid& ages = panels.front().ages();

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const RatePanel& panel = panels[tasks[i].panel];
    const int origin = tasks[i].origin;
    const TaskResult& r = results[i];
    const WindowInfo info{panel.country(), origin, target_end - origin};
    if (r.skipped) {
      out.skipped.push_back(info);
      continue;
    }
    out.windows.push_back(info);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const ModelForecast& f = c < r.runs.size() ? r.runs[c].forecast : r.combined[c - r.runs.size()];
      const int col = static_cast<int>(c);
      for (int h = 1; h <= info.horizons; ++h) {
        for (int a = 0; a < ages.size(); ++a) {
          const ErrorRecord rec{panel.country(), origin,        h,
                                ages[a],         r.actual(h - 1, a), f.point(h - 1, a),
                                f.lower(h - 1, a), f.upper(h - 1, a)};
          out.scores.add(h, col, rec.actual, rec.point, rec.lower, rec.upper, alpha);
          out.records[c].push_back(rec);
        }
      }
    }
    for (std::size_t m = 0; m < r.runs.size(); ++m) {
      out.bics.push_back({panel.country(), origin, columns[m], r.runs[m].bic});
    }
  }
  return out;
}

}  // namespace

void StudyDesign::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (!(stage1_initial_fit_end < in_sample_end && in_sample_end < holdout_end)) {
    fail("design years must satisfy stage1_initial_fit_end < in_sample_end < holdout_end");
  }
  if (horizon != in_sample_end - stage1_initial_fit_end) {
    fail("H must equal in_sample_end - stage1_initial_fit_end (" +
         std::to_string(in_sample_end - stage1_initial_fit_end) + ")");
  }
  if (holdout_end - in_sample_end > horizon) fail("holdout period is longer than H");
  if (models.empty()) fail("no models configured");
  if (level <= 0.0 || level >= 1.0) fail("interval level must lie in (0, 1)");
  if (num_components < 1) fail("number of components must be positive");
  if (lambda_window < 4) fail("lambda window must cover at least 4 years");
  if (lambda_grid_step <= 0.0 || lambda_grid_step >= 0.5) fail("lambda grid step must lie in (0, 0.5)");
  transform.validate();
}

int StudyDesign::effective_min_fit_years() const {
  return min_fit_years > 0 ? min_fit_years : std::max(num_components + 2, 10);
}

ModelOptions StudyDesign::model_options(double hu_lambda) const {
  ModelOptions o;
  o.num_components = num_components;
  o.hu_lambda = hu_lambda;
  o.efficiency = efficiency;
  o.level = level;
  o.smoothing = smoothing;
  return o;
}

int StageOutput::window_count(const std::string& country, int horizon) const {
  return static_cast<int>(std::count_if(windows.begin(), windows.end(), [&](const WindowInfo& w) {
    return w.country == country && w.horizons >= horizon;
  }));
}

double estimate_hu_lambda(const RatePanel& panel, const StudyDesign& design) {
  const int last = design.in_sample_end - design.lambda_lag;
  const int first = std::max(last - design.lambda_window + 1, panel.first_year());
  const TransformedPanel tp = boxcox(panel.slice(first, last), design.transform);
  HuOptions hu;
  hu.variant = HuVariant::HUw;
  hu.num_components = design.num_components;
  hu.efficiency = design.efficiency;
  hu.smoothing = design.smoothing;
  LambdaSearchOptions search;
  search.grid_step = design.lambda_grid_step;
  try {
    return select_hu_lambda(tp, hu, search);
  } catch (const Error& e) {
    throw Error(e.code(), panel.country() + " lambda selection: " + e.what());
  }
}

std::map<std::string, double> estimate_hu_lambdas(const std::vector<RatePanel>& panels,
                                                  const StudyDesign& design,
                                                  std::vector<std::string>* warnings) {
  std::map<std::string, double> out;
  if (std::find(design.models.begin(), design.models.end(), ModelId::HUw) == design.models.end()) return out;
  if (warnings != nullptr && design.in_sample_end - design.lambda_lag > design.stage1_initial_fit_end) {
    warnings->push_back("HUw lambda window overlaps the stage-1 forecasting period");
  }
  std::vector<double> lambdas(panels.size());
  detail::parallel_for(static_cast<int>(panels.size()), design.threads, [&](int i) {
    lambdas[static_cast<std::size_t>(i)] = estimate_hu_lambda(panels[static_cast<std::size_t>(i)], design);
  });
  for (std::size_t i = 0; i < panels.size(); ++i) out[panels[i].country()] = lambdas[i];
  return out;
}

std::map<AveragingMethod, WeightTable> estimate_weights(const StageOutput& stage1, const StudyDesign& design,
                                                        std::vector<McsResult>* mcs_out) {
  const std::vector<std::string> names = model_names(design.models);
  const int count = static_cast<int>(names.size());
  const int horizons = stage1.scores.horizons();
  std::map<AveragingMethod, WeightTable> out;
  for (AveragingMethod method : design.methods) {
    switch (method) {
      case AveragingMethod::Frequentist:
        out[method] = frequentist_weights(stage1.scores, names);
        break;
      case AveragingMethod::Equal: {
        const auto w = equal_weights(count);
        out[method] = WeightTable::replicate(names, horizons, w, w);
        break;
      }
      case AveragingMethod::Bayesian: {
        // Adjust within each (country, window), then average.
        std::vector<double> sum(static_cast<std::size_t>(count), 0.0);
        int groups = 0;
        for (std::size_t i = 0; i + static_cast<std::size_t>(count) <= stage1.bics.size();
             i += static_cast<std::size_t>(count)) {
          double best = stage1.bics[i].bic;
          for (int l = 1; l < count; ++l) best = std::min(best, stage1.bics[i + static_cast<std::size_t>(l)].bic);
          for (int l = 0; l < count; ++l) {
            sum[static_cast<std::size_t>(l)] += stage1.bics[i + static_cast<std::size_t>(l)].bic - best;
          }
          ++groups;
        }
        if (groups == 0) throw Error(ErrorCode::EmptyGroup, "no BIC records");
        for (double& s : sum) s /= groups;
        const auto w = bic_weights(sum);
        out[method] = WeightTable::replicate(names, horizons, w, w);
        break;
      }
      case AveragingMethod::MCS: {
        WeightTable t;
        t.models = names;
        t.point.resize(horizons, count);
        std::vector<McsResult> results;
        for (int h = 1; h <= horizons; ++h) {
          std::vector<const ErrorRecord*> rows;
          for (const ErrorRecord& r : stage1.records[0]) {
            if (r.horizon == h) rows.push_back(&r);
          }
          Eigen::MatrixXd losses(count, static_cast<Eigen::Index>(rows.size()));
          for (int l = 0; l < count; ++l) {
            Eigen::Index k = 0;
            for (const ErrorRecord& r : stage1.records[static_cast<std::size_t>(l)]) {
              if (r.horizon == h) losses(l, k++) = std::abs(r.actual - r.point);
            }
          }
          McsOptions opts = design.mcs;
          opts.seed = design.mcs.seed + static_cast<std::uint64_t>(h);
          McsResult res;
          if (count == 1) {
            res.survivors = {0};
            res.alpha = opts.alpha;
            res.bootstrap = 0;
            res.seed = opts.seed;
          } else {
            res = mcs_select(losses, opts);
          }
          const auto w = survivor_weights(res.survivors, count);
          t.point.row(h - 1) = Eigen::Map<const Eigen::RowVectorXd>(w.data(), count);
          results.push_back(std::move(res));
        }
        t.interval = t.point;
        t.validate();
        out[method] = std::move(t);
        if (mcs_out != nullptr) *mcs_out = std::move(results);
        break;
      }
    }
  }
  return out;
}

StageOutput run_stage1(const std::vector<RatePanel>& panels, const StudyDesign& design,
                       const std::map<std::string, double>* hu_lambda) {
  design.validate();
  std::vector<std::string> warnings;
  const std::map<std::string, double> lambdas =
      hu_lambda != nullptr ? *hu_lambda : estimate_hu_lambdas(panels, design, &warnings);
  StageOutput out =
      run_windows(panels, design, design.stage1_initial_fit_end, design.in_sample_end, lambdas, nullptr);
  out.warnings = std::move(warnings);
  out.weights = estimate_weights(out, design, &out.mcs);
  return out;
}

StageOutput run_stage2(const std::vector<RatePanel>& panels, const StudyDesign& design,
                       const std::map<AveragingMethod, WeightTable>& weights,
                       const std::map<std::string, double>& hu_lambda) {
  design.validate();
  for (AveragingMethod m : design.methods) {
    const auto it = weights.find(m);
    if (it == weights.end()) throw Error(ErrorCode::InvalidArgument, "no weights for " + to_string(m));
    if (it->second.models != model_names(design.models)) {
      throw Error(ErrorCode::IncompatibleForecasts, to_string(m) + " weights are for a different model set");
    }
  }
  return run_windows(panels, design, design.in_sample_end, design.holdout_end, hu_lambda, &weights);
}

CombinedForecast forecast_production(const RatePanel& panel, const StudyDesign& design,
                                     const WeightTable& weights, AveragingMethod method, int horizon,
                                     double hu_lambda) {
  if (weights.horizons() < horizon) {
    throw Error(ErrorCode::InvalidArgument, "weights cover " + std::to_string(weights.horizons()) +
                                                " horizons, " + std::to_string(horizon) + " requested");
  }
  const int start = fit_start(panel, design);
  const TransformedPanel fit = boxcox(panel.slice(start, panel.last_year()), design.transform);
  std::vector<ModelId> ids;
  for (const std::string& name : weights.models) ids.push_back(parse_model_id(name));
  const std::vector<ModelRun> runs = run_models(ids, fit, horizon, design.model_options(hu_lambda));
  std::vector<ModelForecast> forecasts;
  for (const ModelRun& r : runs) forecasts.push_back(r.forecast);
  return combine_forecasts(forecasts, weights, display_name(method));
}

}  // namespace fertcast
