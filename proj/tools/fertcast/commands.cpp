#include "commands.hpp"

#include "fertcast/error.hpp"
#include "fertcast/harness.hpp"
#include "fertcast/report.hpp"
#include "fertcast/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace fertcast::cli {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string data;
  std::string format = "csv";
  std::vector<std::string> countries;
  int horizons = 20;
  std::optional<int> in_sample_end;
  std::optional<int> holdout_end;
  std::optional<int> stage1_end;
  std::optional<int> fit_start;
  int age_min = 15;
  int age_max = 49;
  double kappa = 0.4;
  int components = 6;
  std::vector<std::string> models;
  std::vector<std::string> methods;
  double mcs_alpha = 0.15;
  std::string mcs_statistic = "Tmax";
  int bootstrap = 5000;
  int block_length = 0;
  std::uint64_t seed = 20190501;
  double level = 0.8;
  int threads = 1;
  std::string out = ".";
  std::vector<std::string> emit{"scores", "weights"};

  // forecast
  std::string country;
  std::string method = "frequentist";
  std::string weights_path;

  // synth
  int synth_count = 5;
  int synth_first = 1950;
  int synth_last = 2011;
};

AgeGrid grid_of(const RunConfig& c) {
  if (c.age_min > c.age_max) throw ConfigError("age-min exceeds age-max");
  return AgeGrid::range(c.age_min, c.age_max);
}

std::vector<RatePanel> load_panels(const RunConfig& c) {
  if (c.data.empty()) throw ConfigError("no data path given (--data)");
  const fs::path path(c.data);
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "data path does not exist: " + path.string());
  const AgeGrid grid = grid_of(c);
  std::vector<RatePanel> panels;
  if (c.format == "csv") {
    auto all = load_csv_long(path, CsvSchema{}, grid);
    if (c.countries.empty()) {
      for (auto& [name, panel] : all) panels.push_back(std::move(panel));
    } else {
      for (const auto& name : c.countries) {
        auto it = all.find(name);
        if (it == all.end()) throw Error(ErrorCode::UnknownCountry, "country '" + name + "' not in " + path.string());
        panels.push_back(it->second);
      }
    }
  } else if (c.format == "hfd") {
    if (fs::is_directory(path)) {
      std::vector<std::string> names = c.countries;
      if (names.empty()) {
        for (const auto& entry : fs::directory_iterator(path)) {
          const std::string file = entry.path().filename().string();
          const std::string suffix = "asfrRR.txt";
          if (file.size() > suffix.size() && file.ends_with(suffix)) {
            names.push_back(file.substr(0, file.size() - suffix.size()));
          }
        }
        std::sort(names.begin(), names.end());
      }
      for (const auto& name : names) {
        const fs::path file = path / (name + "asfrRR.txt");
        if (!fs::exists(file)) throw Error(ErrorCode::Io, "missing data file " + file.string());
        panels.push_back(load_hfd(file, grid, name));
      }
    } else {
      if (c.countries.size() > 1) throw ConfigError("a single HFD file holds one country");
      const std::string name = c.countries.empty() ? path.stem().string() : c.countries.front();
      panels.push_back(load_hfd(path, grid, name));
    }
  } else {
    throw ConfigError("unknown format '" + c.format + "' (expected hfd or csv)");
  }
  if (panels.empty()) throw Error(ErrorCode::EmptyFile, "no country panels found in " + path.string());
  return panels;
}

StudyDesign make_design(const RunConfig& c) {
  StudyDesign d;
  if (c.horizons < 1) throw ConfigError("horizons must be at least 1");
  d.horizon = c.horizons;
  d.in_sample_end = c.in_sample_end.value_or(1991);
  d.stage1_initial_fit_end = c.stage1_end.value_or(d.in_sample_end - d.horizon);
  d.holdout_end = c.holdout_end.value_or(d.in_sample_end + d.horizon);
  d.fit_start_year = c.fit_start;
  d.transform.kappa = c.kappa;
  d.num_components = c.components;
  d.level = c.level;
  d.threads = c.threads;
  d.mcs.alpha = c.mcs_alpha;
  d.mcs.bootstrap = c.bootstrap;
  d.mcs.block_length = c.block_length;
  d.mcs.seed = c.seed;
  d.mcs.threads = c.threads;
  if (c.mcs_statistic == "Tmax") {
    d.mcs.statistic = McsStatistic::Max;
  } else if (c.mcs_statistic == "TR") {
    d.mcs.statistic = McsStatistic::Range;
  } else {
    throw ConfigError("mcs-statistic must be Tmax or TR");
  }
  try {
    if (!c.models.empty()) {
      d.models.clear();
      for (const auto& m : c.models) d.models.push_back(parse_model_id(m));
    }
    if (!c.methods.empty()) {
      d.methods.clear();
      for (const auto& m : c.methods) d.methods.push_back(parse_averaging_method(m));
    }
    d.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return d;
}

/// Files written by a command; removed again unless the command commits.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& f : files_) fs::remove(dir_ / f, ec);
  }

  void prepare() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + dir_.string());
  }
  void write(const std::string& name, const std::string& content) {
    files_.push_back(name);
    std::ofstream f(dir_ / name, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorCode::Io, "cannot write " + (dir_ / name).string());
  }
  template <typename Writer>
  void write_with(const std::string& name, Writer&& writer) {
    std::ostringstream ss;
    writer(ss);
    write(name, ss.str());
  }
  const std::vector<std::string>& files() const { return files_; }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

bool emits(const RunConfig& c, const std::string& what) {
  return std::find(c.emit.begin(), c.emit.end(), what) != c.emit.end();
}

void write_production_forecast(OutputSet& outputs, const RatePanel& panel, const StudyDesign& design,
                               const WeightTable& weights, AveragingMethod method, int horizon,
                               double lambda) {
  const CombinedForecast f = forecast_production(panel, design, weights, method, horizon, lambda);
  outputs.write_with("forecast_" + panel.country() + "_" + to_string(method) + ".csv",
                     [&](std::ostream& os) { write_forecast(os, f.forecast); });
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const StudyDesign design = make_design(c);
  const std::vector<RatePanel> panels = load_panels(c);
  for (const auto& e : c.emit) {
    if (e != "scores" && e != "weights" && e != "forecasts" && e != "plotdata") {
      throw ConfigError("unknown emit item '" + e + "'");
    }
  }

  StageOutput stage1 = run_stage1(panels, design);
  for (const auto& w : stage1.warnings) out << "warning: " << w << '\n';
  const StageOutput stage2 = run_stage2(panels, design, stage1.weights, stage1.hu_lambda);

  OutputSet outputs(c.out);
  outputs.prepare();
  if (emits(c, "scores")) {
    outputs.write_with("scores_point.csv", [&](std::ostream& os) { write_point_scores(os, stage2.scores, CellScale::Percent); });
    outputs.write_with("scores_interval.csv", [&](std::ostream& os) { write_interval_scores(os, stage2.scores, CellScale::Percent); });
    outputs.write_with("scores_point_raw.csv", [&](std::ostream& os) { write_point_scores(os, stage2.scores, CellScale::Raw); });
    outputs.write_with("scores_interval_raw.csv", [&](std::ostream& os) { write_interval_scores(os, stage2.scores, CellScale::Raw); });
  }
  if (emits(c, "weights")) {
    for (const auto& [method, table] : stage1.weights) {
      outputs.write_with("weights_" + to_string(method) + ".csv",
                         [&](std::ostream& os) { write_weights(os, table, CellScale::Percent); });
      outputs.write_with("weights_" + to_string(method) + "_raw.csv",
                         [&](std::ostream& os) { write_weights(os, table, CellScale::Raw); });
    }
  }
  if (emits(c, "forecasts") || emits(c, "plotdata")) {
    for (const RatePanel& panel : panels) {
      const auto it = stage1.hu_lambda.find(panel.country());
      const double lambda = it != stage1.hu_lambda.end() ? it->second : HuOptions{}.lambda;
      for (const auto& [method, table] : stage1.weights) {
        write_production_forecast(outputs, panel, design, table, method, design.horizon, lambda);
      }
    }
  }
  ManifestInfo info;
  info.command = "evaluate";
  info.outputs = outputs.files();
  info.hu_lambda = stage1.hu_lambda;
  info.warnings = stage1.warnings;
  outputs.write("manifest.json", manifest_json(design, panels, info));
  outputs.commit();

  const auto& cols = stage2.scores.columns();
  out << "median MAFE x100 / mean interval score x100 over horizons 1.." << stage2.scores.horizons() << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-12s %8.2f %8.2f\n", cols[i].c_str(),
                  100.0 * stage2.scores.median_mafe(static_cast<int>(i)),
                  100.0 * stage2.scores.median_interval_score(static_cast<int>(i)));
    out << line;
  }
  out << "outputs written to " << c.out << '\n';
  return kExitOk;
}

int cmd_forecast(const RunConfig& c, std::ostream& out) {
  if (c.country.empty()) throw ConfigError("forecast needs --country");
  const AveragingMethod method = [&] {
    try {
      return parse_averaging_method(c.method);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  RunConfig scoped = c;
  scoped.countries = {c.country};
  const std::vector<RatePanel> panels = load_panels(scoped);
  const RatePanel& panel = panels.front();

  // Weight estimation design: stage 1 ending at the last observed year.
  RunConfig wcfg = c;
  wcfg.in_sample_end = c.in_sample_end.value_or(panel.last_year());
  wcfg.stage1_end = c.stage1_end.value_or(*wcfg.in_sample_end - c.horizons);
  wcfg.holdout_end = *wcfg.in_sample_end + 1;
  wcfg.methods = {to_string(method)};
  const StudyDesign design = make_design(wcfg);

  WeightTable weights;
  double lambda = HuOptions{}.lambda;
  std::vector<std::string> warnings;
  const auto lambdas = estimate_hu_lambdas(panels, design, &warnings);
  if (auto it = lambdas.find(panel.country()); it != lambdas.end()) lambda = it->second;
  if (!c.weights_path.empty()) {
    std::ifstream in(c.weights_path);
    if (!in) throw Error(ErrorCode::Io, "cannot read weights file " + c.weights_path);
    weights = read_weights(in);
  } else {
    const StageOutput stage1 = run_stage1(panels, design, &lambdas);
    weights = stage1.weights.at(method);
  }

  OutputSet outputs(c.out);
  outputs.prepare();
  write_production_forecast(outputs, panel, design, weights, method, c.horizons, lambda);
  ManifestInfo info;
  info.command = "forecast";
  info.outputs = outputs.files();
  info.hu_lambda = lambdas;
  info.warnings = warnings;
  info.extra["method"] = to_string(method);
  info.extra["weights"] = c.weights_path.empty() ? "estimated" : c.weights_path;
  outputs.write("manifest.json", manifest_json(design, panels, info));
  outputs.commit();
  out << "wrote " << outputs.files().front() << " to " << c.out << '\n';
  return kExitOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  std::vector<std::string> problems;
  std::optional<StudyDesign> design;
  try {
    design = make_design(c);
  } catch (const ConfigError& e) {
    problems.push_back(std::string("design: ") + e.what());
  }
  std::vector<RatePanel> panels;
  try {
    panels = load_panels(c);
  } catch (const Error& e) {
    problems.push_back(std::string("data: ") + e.what());
  }
  for (const RatePanel& p : panels) {
    out << p.country() << ": " << p.first_year() << "-" << p.last_year() << ", ages " << p.ages().front()
        << "-" << p.ages().back() << ", " << p.num_years() << " years\n";
    if (!design) continue;
    const int start = design->fit_start_year ? *design->fit_start_year : p.first_year();
    if (p.first_year() > start) {
      problems.push_back(p.country() + ": data start in " + std::to_string(p.first_year()) +
                         ", after the configured fit start " + std::to_string(start));
    }
    const int first_fit = design->stage1_initial_fit_end - std::max(start, p.first_year()) + 1;
    if (first_fit < design->effective_min_fit_years()) {
      problems.push_back(p.country() + ": H = " + std::to_string(design->horizon) +
                         " exceeds the available in-sample span (first fit has " + std::to_string(first_fit) +
                         " years, at least " + std::to_string(design->effective_min_fit_years()) + " needed)");
    }
    if (p.last_year() < design->holdout_end) {
      problems.push_back(p.country() + ": data end in " + std::to_string(p.last_year()) +
                         ", before holdout end " + std::to_string(design->holdout_end));
    }
  }
  if (problems.empty()) {
    out << "ok\n";
    return kExitOk;
  }
  for (const auto& p : problems) out << "problem: " << p << '\n';
  return kExitRuntime;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  SyntheticOptions o;
  o.first_year = c.synth_first;
  o.last_year = c.synth_last;
  o.ages = grid_of(c);
  o.seed = c.seed;
  if (c.synth_count < 1) throw ConfigError("count must be positive");
  const auto panels = synthetic_corpus(c.synth_count, o);
  const fs::path path(c.data.empty() ? "synthetic.csv" : c.data);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_csv_long(path, panels);
  out << "wrote " << panels.size() << " synthetic countries to " << path.string() << '\n';
  return kExitOk;
}

void add_common_options(CLI::App& app, RunConfig& c) {
  app.add_option("--data", c.data, "Data file or directory (synth: output file)");
  app.add_option("--format", c.format, "Data format")->check(CLI::IsMember({"hfd", "csv"}));
  app.add_option("--countries", c.countries, "Comma-separated country codes")->delimiter(',');
  app.add_option("--horizons", c.horizons, "Forecast horizon H")->check(CLI::PositiveNumber);
  app.add_option("--in-sample-end", c.in_sample_end, "Last year of the weight-estimation period");
  app.add_option("--holdout-end", c.holdout_end, "Last year of the evaluation period");
  app.add_option("--stage1-end", c.stage1_end, "Last fitting year of the first stage-1 window");
  app.add_option("--fit-start", c.fit_start, "First fitting year (default: first data year)");
  app.add_option("--age-min", c.age_min, "Youngest age");
  app.add_option("--age-max", c.age_max, "Oldest age");
  app.add_option("--kappa", c.kappa, "Box-Cox parameter")->check(CLI::NonNegativeNumber);
  app.add_option("--components", c.components, "Number of functional principal components")
      ->check(CLI::PositiveNumber);
  app.add_option("--models", c.models, "Comma-separated constituent models")->delimiter(',');
  app.add_option("--methods", c.methods, "Comma-separated averaging methods")->delimiter(',');
  app.add_option("--mcs-alpha", c.mcs_alpha, "MCS significance level")->check(CLI::Range(0.0, 1.0));
  app.add_option("--mcs-statistic", c.mcs_statistic, "MCS statistic (Tmax or TR)");
  app.add_option("--bootstrap", c.bootstrap, "MCS bootstrap replicates")->check(CLI::PositiveNumber);
  app.add_option("--block-length", c.block_length, "MCS block length (0 = automatic)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--level", c.level, "Prediction interval level")->check(CLI::Range(0.0, 1.0));
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", c.out, "Output directory");
  app.add_option("--emit", c.emit, "Outputs: scores,weights,forecasts,plotdata")->delimiter(',');
  app.add_option("--country", c.country, "Country to forecast");
  app.add_option("--method", c.method, "Averaging method for forecast");
  app.add_option("--weights", c.weights_path, "Raw weight file for forecast");
  app.add_option("--count", c.synth_count, "Synthetic countries to generate");
  app.add_option("--first-year", c.synth_first, "First synthetic year");
  app.add_option("--last-year", c.synth_last, "Last synthetic year");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-averaged fertility forecasting", "fertcast"};
  app.set_version_flag("--version", library_version());
  app.set_config("--config", "", "Flat key = value configuration file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  RunConfig config;
  add_common_options(app, config);
  auto* evaluate = app.add_subcommand("evaluate", "Two-stage backtest: weights, scores and manifest");
  auto* forecast = app.add_subcommand("forecast", "Model-averaged forecast for one country");
  auto* validate = app.add_subcommand("validate", "Check data and configuration");
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus as long CSV");
  for (auto* sub : {evaluate, forecast, validate, synth}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*evaluate) return cmd_evaluate(config, out);
    if (*forecast) return cmd_forecast(config, out);
    if (*validate) return cmd_validate(config, out);
    return cmd_synth(config, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace fertcast::cli
