#pragma once

// Fertility-rate panels: ingestion, validation and the Box-Cox transform pair.

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fertcast {

/// Single-year ages, strictly increasing and non-empty.
class AgeGrid {
 public:
  /// 15..49 inclusive.
  AgeGrid();
  explicit AgeGrid(std::vector<int> ages);

  static AgeGrid range(int first, int last);

  const std::vector<int>& ages() const noexcept { return ages_; }
  int size() const noexcept { return static_cast<int>(ages_.size()); }
  int front() const { return ages_.front(); }
  int back() const { return ages_.back(); }
  int operator[](int i) const { return ages_[static_cast<std::size_t>(i)]; }
  std::optional<int> index_of(int age) const;

  friend bool operator==(const AgeGrid&, const AgeGrid&) = default;

 private:
  std::vector<int> ages_;
};

/// Observed age-specific fertility rates for one country, year x age.
///
/// Years are contiguous and strictly increasing; every cell is finite and
/// non-negative. The constructor enforces all of this.
class RatePanel {
 public:
  RatePanel(std::string country, std::vector<int> years, AgeGrid ages, Eigen::MatrixXd rates);

  const std::string& country() const noexcept { return country_; }
  const std::vector<int>& years() const noexcept { return years_; }
  const AgeGrid& ages() const noexcept { return ages_; }
  const Eigen::MatrixXd& rates() const noexcept { return rates_; }

  int num_years() const noexcept { return static_cast<int>(years_.size()); }
  int first_year() const { return years_.front(); }
  int last_year() const { return years_.back(); }
  std::optional<int> year_index(int year) const;

  /// Rows for years in [first, last]; throws InsufficientHistory when the
  /// panel does not cover the requested span.
  RatePanel slice(int first, int last) const;

 private:
  std::string country_;
  std::vector<int> years_;
  AgeGrid ages_;
  Eigen::MatrixXd rates_;
};

struct TransformSpec {
  double kappa = 0.4;
  /// Only consulted when kappa == 0: zero rates are raised to this floor
  /// instead of raising LogOfZero.
  std::optional<double> log_floor;

  void validate() const;
};

/// Transformed rates m_t(x) on the modelling scale, same shape as the source.
struct TransformedPanel {
  std::string country;
  std::vector<int> years;
  AgeGrid ages;
  Eigen::MatrixXd values;
  TransformSpec spec;

  int num_years() const noexcept { return static_cast<int>(years.size()); }
  int last_year() const { return years.back(); }
  TransformedPanel head(int n_years) const;
};

double boxcox(double rate, const TransformSpec& spec);
/// Inverse transform; the base kappa*m + 1 is clamped at zero so the result
/// is always a valid (non-negative) rate.
double inv_boxcox(double value, const TransformSpec& spec);

Eigen::MatrixXd boxcox(const Eigen::MatrixXd& rates, const TransformSpec& spec);
Eigen::MatrixXd inv_boxcox(const Eigen::MatrixXd& values, const TransformSpec& spec);

TransformedPanel boxcox(const RatePanel& panel, const TransformSpec& spec);
RatePanel inv_boxcox(const TransformedPanel& panel);

/// Human Fertility Database asfrRR 1x1 text layout.
RatePanel load_hfd(const std::filesystem::path& path, const AgeGrid& grid = AgeGrid{},
                   std::string country = {});

struct CsvSchema {
  std::string country = "country";
  std::string year = "year";
  std::string age = "age";
  std::string rate = "rate";
};

/// Long-format CSV with one (country, year, age, rate) cell per row.
std::map<std::string, RatePanel> load_csv_long(const std::filesystem::path& path,
                                               const CsvSchema& schema = {},
                                               const AgeGrid& grid = AgeGrid{});

/// Writes panels in the long CSV layout accepted by load_csv_long.
void write_csv_long(const std::filesystem::path& path, const std::vector<RatePanel>& panels);

}  // namespace fertcast
