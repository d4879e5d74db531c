#include "fertcast/report.hpp"

#include "fertcast/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#ifndef FERTCAST_VERSION
#define FERTCAST_VERSION "0.0.0"
#endif

namespace fertcast {

namespace {

std::string format_cell(double value, CellScale scale, bool percent_multiply) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  if (scale == CellScale::Raw) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", percent_multiply ? value * 100.0 : value);
  }
  return buf;
}

template <typename CellValue, typename MedianValue>
void write_score_table(std::ostream& out, const ScoreTable& table, CellScale scale, CellValue cell,
                       MedianValue median_of) {
  out << "horizon";
  for (const auto& c : table.columns()) out << ',' << c;
  out << '\n';
  const int cols = static_cast<int>(table.columns().size());
  for (int h = 1; h <= table.horizons(); ++h) {
    out << h;
    for (int c = 0; c < cols; ++c) {
      const bool empty = table.cell(h, c).n_obs == 0;
      out << ',' << (empty ? std::string("NA") : format_cell(cell(h, c), scale, true));
    }
    out << '\n';
  }
  out << "Median";
  for (int c = 0; c < cols; ++c) out << ',' << format_cell(median_of(c), scale, true);
  out << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return f;
}

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

void write_point_scores(std::ostream& out, const ScoreTable& table, CellScale scale) {
  write_score_table(
      out, table, scale, [&](int h, int c) { return table.mafe(h, c); },
      [&](int c) {
        try {
          return table.median_mafe(c);
        } catch (const Error&) {
          return std::nan("");
        }
      });
}

void write_interval_scores(std::ostream& out, const ScoreTable& table, CellScale scale) {
  write_score_table(
      out, table, scale, [&](int h, int c) { return table.mean_interval_score(h, c); },
      [&](int c) {
        try {
          return table.median_interval_score(c);
        } catch (const Error&) {
          return std::nan("");
        }
      });
}

void write_weights(std::ostream& out, const WeightTable& table, CellScale scale) {
  out << "horizon";
  for (const auto& m : table.models) out << ",point_" << m;
  for (const auto& m : table.models) out << ",interval_" << m;
  out << '\n';
  for (int h = 0; h < table.horizons(); ++h) {
    out << h + 1;
    for (int l = 0; l < table.num_models(); ++l) out << ',' << format_cell(table.point(h, l), scale, false);
    for (int l = 0; l < table.num_models(); ++l) out << ',' << format_cell(table.interval(h, l), scale, false);
    out << '\n';
  }
}

WeightTable read_weights(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidArgument, "empty weight file");
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "horizon" || header.size() % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "weight file header must be horizon,point_*...,interval_*...");
  }
  const std::size_t count = (header.size() - 1) / 2;
  WeightTable t;
  for (std::size_t l = 0; l < count; ++l) {
    const std::string& p = header[1 + l];
    const std::string& q = header[1 + count + l];
    if (p.rfind("point_", 0) != 0 || q != "interval_" + p.substr(6)) {
      throw Error(ErrorCode::InvalidArgument, "weight file columns out of order at '" + p + "'");
    }
    t.models.push_back(p.substr(6));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size() || cells[0] != std::to_string(rows.size() + 1)) {
      throw Error(ErrorCode::InvalidArgument, "malformed weight row " + std::to_string(rows.size() + 1));
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        row.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw Error(ErrorCode::NonNumericValue, "weight cell '" + cells[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto h = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(count);
  t.point.resize(h, m);
  t.interval.resize(h, m);
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index l = 0; l < m; ++l) {
      t.point(i, l) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
      t.interval(i, l) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(m + l)];
    }
  }
  t.validate();
  return t;
}

void write_forecast(std::ostream& out, const ModelForecast& forecast) {
  out << "horizon,year,age,point,lower,upper\n";
  char buf[160];
  for (int h = 0; h < forecast.horizons(); ++h) {
    for (int a = 0; a < forecast.ages.size(); ++a) {
      std::snprintf(buf, sizeof buf, "%d,%d,%d,%.10g,%.10g,%.10g\n", h + 1, forecast.origin_year + h + 1,
                    forecast.ages[a], forecast.point(h, a), forecast.lower(h, a), forecast.upper(h, a));
      out << buf;
    }
  }
}

void write_score_files(const std::filesystem::path& dir, const ScoreTable& table) {
  auto f1 = open_output(dir / "scores_point.csv");
  write_point_scores(f1, table, CellScale::Percent);
  auto f2 = open_output(dir / "scores_interval.csv");
  write_interval_scores(f2, table, CellScale::Percent);
  auto f3 = open_output(dir / "scores_point_raw.csv");
  write_point_scores(f3, table, CellScale::Raw);
  auto f4 = open_output(dir / "scores_interval_raw.csv");
  write_interval_scores(f4, table, CellScale::Raw);
}

void write_weight_files(const std::filesystem::path& dir, AveragingMethod method, const WeightTable& table) {
  auto f1 = open_output(dir / ("weights_" + to_string(method) + ".csv"));
  write_weights(f1, table, CellScale::Percent);
  auto f2 = open_output(dir / ("weights_" + to_string(method) + "_raw.csv"));
  write_weights(f2, table, CellScale::Raw);
}

std::string panel_fingerprint(const RatePanel& panel) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv1a(h, panel.country());
  char buf[64];
  for (int y : panel.years()) h = fnv1a(h, std::to_string(y) + ";");
  for (int a : panel.ages().ages()) h = fnv1a(h, std::to_string(a) + ";");
  const Eigen::MatrixXd& r = panel.rates();
  for (int i = 0; i < r.rows(); ++i) {
    for (int j = 0; j < r.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g;", r(i, j));
      h = fnv1a(h, buf);
    }
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string library_version() { return FERTCAST_VERSION; }

std::string manifest_json(const StudyDesign& design, const std::vector<RatePanel>& panels,
                          const ManifestInfo& info) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tool"] = "fertcast";
  j["version"] = library_version();
  j["command"] = info.command;
  ordered_json d;
  d["stage1_initial_fit_end"] = design.stage1_initial_fit_end;
  d["in_sample_end"] = design.in_sample_end;
  d["holdout_end"] = design.holdout_end;
  d["horizon"] = design.horizon;
  d["fit_start_year"] = design.fit_start_year ? ordered_json(*design.fit_start_year) : ordered_json(nullptr);
  d["models"] = model_names(design.models);
  std::vector<std::string> methods;
  for (AveragingMethod m : design.methods) methods.push_back(to_string(m));
  d["methods"] = methods;
  d["kappa"] = design.transform.kappa;
  d["components"] = design.num_components;
  d["level"] = design.level;
  d["efficiency"] = design.efficiency;
  d["lambda_window"] = design.lambda_window;
  d["lambda_lag"] = design.lambda_lag;
  d["mcs"] = {{"alpha", design.mcs.alpha},
              {"statistic", design.mcs.statistic == McsStatistic::Max ? "Tmax" : "TR"},
              {"bootstrap", design.mcs.bootstrap},
              {"block_length", design.mcs.block_length == 0 ? ordered_json("auto")
                                                            : ordered_json(design.mcs.block_length)}};
  j["design"] = d;
  j["seed"] = design.mcs.seed;
  ordered_json data = ordered_json::array();
  for (const RatePanel& p : panels) {
    data.push_back({{"country", p.country()},
                    {"first_year", p.first_year()},
                    {"last_year", p.last_year()},
                    {"ages", {p.ages().front(), p.ages().back()}},
                    {"fingerprint", panel_fingerprint(p)}});
  }
  j["data"] = data;
  if (!info.hu_lambda.empty()) j["hu_lambda"] = info.hu_lambda;
  j["warnings"] = info.warnings;
  j["outputs"] = info.outputs;
  for (const auto& [k, v] : info.extra) j[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace fertcast
