#pragma once

// Point (MAFE) and interval (Gneiting-Raftery interval score) accuracy.

#include <span>
#include <string>
#include <vector>

namespace fertcast {

struct ErrorRecord {
  std::string country;
  int origin_year = 0;  // last year of the fitting period
  int horizon = 1;
  int age = 0;
  double actual = 0.0;
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Mean |actual - point| over records with the given horizon.
double mafe(std::span<const ErrorRecord> records, int horizon);

/// (upper - lower) + (2/alpha)(lower - actual) 1{actual < lower}
///                 + (2/alpha)(actual - upper) 1{actual > upper}.
double interval_score(double actual, double lower, double upper, double alpha = 0.2);

double mean_interval_score(std::span<const ErrorRecord> records, int horizon, double alpha = 0.2);

/// Running sums for one (horizon, column) cell. Reductions add counts and
/// sums rather than running means so the result does not depend on grouping.
struct ScoreCell {
  double abs_error_sum = 0.0;
  double interval_score_sum = 0.0;
  long n_obs = 0;

  double mafe() const;
  double mean_interval_score() const;
  void add(double abs_error, double score) {
    abs_error_sum += abs_error;
    interval_score_sum += score;
    ++n_obs;
  }
  void merge(const ScoreCell& other) {
    abs_error_sum += other.abs_error_sum;
    interval_score_sum += other.interval_score_sum;
    n_obs += other.n_obs;
  }
};

/// MAFE and mean interval score per (horizon 1..H, column). Columns are model
/// ids followed by averaging methods.
class ScoreTable {
 public:
  ScoreTable(std::vector<std::string> columns, int horizons);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  int horizons() const noexcept { return horizons_; }
  int column_index(const std::string& name) const;

  ScoreCell& cell(int horizon, int column);
  const ScoreCell& cell(int horizon, int column) const;

  void add(int horizon, int column, double actual, double point, double lower, double upper,
           double alpha);
  void merge(const ScoreTable& other);

  double mafe(int horizon, int column) const { return cell(horizon, column).mafe(); }
  double mean_interval_score(int horizon, int column) const {
    return cell(horizon, column).mean_interval_score();
  }
  /// Median over horizons of a column; horizons without observations skipped.
  double median_mafe(int column) const;
  double median_interval_score(int column) const;

 private:
  std::vector<std::string> columns_;
  int horizons_;
  std::vector<ScoreCell> cells_;
};

double median(std::vector<double> values);

}  // namespace fertcast
