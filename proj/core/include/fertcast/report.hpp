#pragma once

// CSV and JSON emitters for score tables, weight tables, forecasts and the
// run manifest.

#include "fertcast/averaging.hpp"
#include "fertcast/data.hpp"
#include "fertcast/harness.hpp"
#include "fertcast/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fertcast {

enum class CellScale { Percent, Raw };

/// Rows "1".."H" then "Median"; one column per score column. Percent cells
/// are value x 100 with two decimals, raw cells use 17 significant digits.
/// Cells without observations print "NA".
void write_point_scores(std::ostream& out, const ScoreTable& table, CellScale scale);
void write_interval_scores(std::ostream& out, const ScoreTable& table, CellScale scale);

/// Horizon rows; point-weight columns then interval-weight columns. Percent
/// here means two decimals (weights are not multiplied by 100).
void write_weights(std::ostream& out, const WeightTable& table, CellScale scale);

/// Parses the layout written by write_weights; throws InvalidArgument on a
/// malformed file and validates the result.
WeightTable read_weights(std::istream& in);

/// Columns horizon, year, age, point, lower, upper (rate scale).
void write_forecast(std::ostream& out, const ModelForecast& forecast);

/// Writes scores_point.csv, scores_interval.csv and their _raw variants.
void write_score_files(const std::filesystem::path& dir, const ScoreTable& table);
/// Writes weights_<method>.csv and weights_<method>_raw.csv.
void write_weight_files(const std::filesystem::path& dir, AveragingMethod method, const WeightTable& table);

/// 64-bit FNV-1a over the panel's country, years, ages and rates.
std::string panel_fingerprint(const RatePanel& panel);

struct ManifestInfo {
  std::string command;
  std::vector<std::string> outputs;
  std::map<std::string, double> hu_lambda;
  std::vector<std::string> warnings;
  std::map<std::string, std::string> extra;
};

/// Deterministic JSON (no timestamps): design, seed, library version and
/// per-country data fingerprints.
std::string manifest_json(const StudyDesign& design, const std::vector<RatePanel>& panels,
                          const ManifestInfo& info);

std::string library_version();

}  // namespace fertcast
