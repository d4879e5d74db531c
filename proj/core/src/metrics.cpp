#include "fertcast/metrics.hpp"

#include "fertcast/error.hpp"

#include <algorithm>
#include <cmath>

namespace fertcast {

double mafe(std::span<const ErrorRecord> records, int horizon) {
  double sum = 0.0;
  long n = 0;
  for (const auto& r : records) {
    if (r.horizon != horizon) continue;
    sum += std::abs(r.actual - r.point);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyGroup, "no records at horizon " + std::to_string(horizon));
  return sum / static_cast<double>(n);
}

double interval_score(double actual, double lower, double upper, double alpha) {
  if (!(lower <= upper)) throw Error(ErrorCode::BadInterval, "lower bound exceeds upper bound");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  double score = upper - lower;
  if (actual < lower) score += 2.0 / alpha * (lower - actual);
  if (actual > upper) score += 2.0 / alpha * (actual - upper);
  return score;
}

double mean_interval_score(std::span<const ErrorRecord> records, int horizon, double alpha) {
  double sum = 0.0;
  long n = 0;
  for (const auto& r : records) {
    if (r.horizon != horizon) continue;
    sum += interval_score(r.actual, r.lower, r.upper, alpha);
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::EmptyGroup, "no records at horizon " + std::to_string(horizon));
  return sum / static_cast<double>(n);
}

double ScoreCell::mafe() const {
  if (n_obs == 0) throw Error(ErrorCode::EmptyGroup, "empty score cell");
  return abs_error_sum / static_cast<double>(n_obs);
}

double ScoreCell::mean_interval_score() const {
  if (n_obs == 0) throw Error(ErrorCode::EmptyGroup, "empty score cell");
  return interval_score_sum / static_cast<double>(n_obs);
}

ScoreTable::ScoreTable(std::vector<std::string> columns, int horizons)
    : columns_(std::move(columns)), horizons_(horizons),
      cells_(static_cast<std::size_t>(horizons) * columns_.size()) {
  if (horizons < 1) throw Error(ErrorCode::InvalidArgument, "score table needs at least one horizon");
}

int ScoreTable::column_index(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw Error(ErrorCode::InvalidArgument, "no score column '" + name + "'");
  return static_cast<int>(it - columns_.begin());
}

ScoreCell& ScoreTable::cell(int horizon, int column) {
  if (horizon < 1 || horizon > horizons_ || column < 0 || column >= static_cast<int>(columns_.size())) {
    throw Error(ErrorCode::InvalidArgument, "score cell out of range");
  }
  return cells_[static_cast<std::size_t>(horizon - 1) * columns_.size() + static_cast<std::size_t>(column)];
}

const ScoreCell& ScoreTable::cell(int horizon, int column) const {
  return const_cast<ScoreTable*>(this)->cell(horizon, column);
}

void ScoreTable::add(int horizon, int column, double actual, double point, double lower, double upper,
                     double alpha) {
  cell(horizon, column).add(std::abs(actual - point), interval_score(actual, lower, upper, alpha));
}

void ScoreTable::merge(const ScoreTable& other) {
  if (other.columns_ != columns_ || other.horizons_ != horizons_) {
    throw Error(ErrorCode::IncompatibleForecasts, "score tables differ in layout");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i].merge(other.cells_[i]);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyGroup, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double ScoreTable::median_mafe(int column) const {
  std::vector<double> v;
  for (int h = 1; h <= horizons_; ++h) {
    if (cell(h, column).n_obs > 0) v.push_back(mafe(h, column));
  }
  return median(std::move(v));
}

double ScoreTable::median_interval_score(int column) const {
  std::vector<double> v;
  for (int h = 1; h <= horizons_; ++h) {
    if (cell(h, column).n_obs > 0) v.push_back(mean_interval_score(h, column));
  }
  return median(std::move(v));
}

}  // namespace fertcast
