#include "fertcast/data.hpp"

#include "fertcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

namespace fertcast {

// ---------------------------------------------------------------- AgeGrid

AgeGrid::AgeGrid() : AgeGrid(range(15, 49)) {}

AgeGrid::AgeGrid(std::vector<int> ages) : ages_(std::move(ages)) {
  if (ages_.empty()) throw Error(ErrorCode::InvalidArgument, "age grid is empty");
  for (std::size_t i = 1; i < ages_.size(); ++i) {
    if (ages_[i] <= ages_[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "age grid must be strictly increasing");
    }
  }
}

AgeGrid AgeGrid::range(int first, int last) {
  if (last < first) throw Error(ErrorCode::InvalidArgument, "age range is empty");
  std::vector<int> ages;
  for (int a = first; a <= last; ++a) ages.push_back(a);
  return AgeGrid(std::move(ages));
}

std::optional<int> AgeGrid::index_of(int age) const {
  auto it = std::lower_bound(ages_.begin(), ages_.end(), age);
  if (it == ages_.end() || *it != age) return std::nullopt;
  return static_cast<int>(it - ages_.begin());
}

// -------------------------------------------------------------- RatePanel

RatePanel::RatePanel(std::string country, std::vector<int> years, AgeGrid ages,
                     Eigen::MatrixXd rates)
    : country_(std::move(country)), years_(std::move(years)), ages_(std::move(ages)),
      rates_(std::move(rates)) {
  if (years_.empty()) throw Error(ErrorCode::EmptyFile, "panel has no years");
  if (rates_.rows() != static_cast<Eigen::Index>(years_.size()) || rates_.cols() != ages_.size()) {
    throw Error(ErrorCode::InvalidArgument, "rate matrix shape does not match years x ages");
  }
  for (std::size_t i = 1; i < years_.size(); ++i) {
    if (years_[i] != years_[i - 1] + 1) {
      throw Error(ErrorCode::MissingCell, "years are not contiguous: missing " +
                                              std::to_string(years_[i - 1] + 1));
    }
  }
  for (Eigen::Index t = 0; t < rates_.rows(); ++t) {
    for (Eigen::Index a = 0; a < rates_.cols(); ++a) {
      const double r = rates_(t, a);
      if (!std::isfinite(r)) {
        throw Error(ErrorCode::NonNumericValue,
                    "non-finite rate at year " + std::to_string(years_[static_cast<std::size_t>(t)]));
      }
      if (r < 0.0) {
        throw Error(ErrorCode::NegativeRate,
                    "negative rate at year " + std::to_string(years_[static_cast<std::size_t>(t)]) +
                        ", age " + std::to_string(ages_[static_cast<int>(a)]));
      }
    }
  }
}

std::optional<int> RatePanel::year_index(int year) const {
  if (year < years_.front() || year > years_.back()) return std::nullopt;
  return year - years_.front();
}

RatePanel RatePanel::slice(int first, int last) const {
  auto i0 = year_index(first);
  auto i1 = year_index(last);
  if (!i0 || !i1 || last < first) {
    throw Error(ErrorCode::InsufficientHistory,
                country_ + ": panel " + std::to_string(first_year()) + "-" +
                    std::to_string(last_year()) + " does not cover " + std::to_string(first) +
                    "-" + std::to_string(last));
  }
  std::vector<int> years(years_.begin() + *i0, years_.begin() + *i1 + 1);
  return RatePanel(country_, std::move(years), ages_, rates_.middleRows(*i0, *i1 - *i0 + 1));
}

TransformedPanel TransformedPanel::head(int n_years) const {
  if (n_years < 1 || n_years > num_years()) {
    throw Error(ErrorCode::InvalidArgument, "head() length out of range");
  }
  TransformedPanel out{country, {years.begin(), years.begin() + n_years}, ages,
                       values.topRows(n_years), spec};
  return out;
}

// -------------------------------------------------------------- Box-Cox

void TransformSpec::validate() const {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "kappa must lie in [0, 1]");
  }
  if (log_floor && !(*log_floor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "log floor must be positive");
  }
}

double boxcox(double rate, const TransformSpec& spec) {
  if (spec.kappa == 0.0) {
    if (rate <= 0.0) {
      if (!spec.log_floor) throw Error(ErrorCode::LogOfZero, "log transform of a zero rate");
      rate = std::max(rate, *spec.log_floor);
    }
    return std::log(rate);
  }
  return (std::pow(rate, spec.kappa) - 1.0) / spec.kappa;
}

double inv_boxcox(double value, const TransformSpec& spec) {
  if (spec.kappa == 0.0) return std::exp(value);
  const double base = spec.kappa * value + 1.0;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / spec.kappa);
}

Eigen::MatrixXd boxcox(const Eigen::MatrixXd& rates, const TransformSpec& spec) {
  spec.validate();
  return rates.unaryExpr([&](double f) { return boxcox(f, spec); });
}

Eigen::MatrixXd inv_boxcox(const Eigen::MatrixXd& values, const TransformSpec& spec) {
  spec.validate();
  return values.unaryExpr([&](double m) { return inv_boxcox(m, spec); });
}

TransformedPanel boxcox(const RatePanel& panel, const TransformSpec& spec) {
  return TransformedPanel{panel.country(), panel.years(), panel.ages(), boxcox(panel.rates(), spec),
                          spec};
}

RatePanel inv_boxcox(const TransformedPanel& panel) {
  return RatePanel(panel.country, panel.years, panel.ages, inv_boxcox(panel.values, panel.spec));
}

// -------------------------------------------------------------- loading

namespace {

// Age label as it appears in source files: "30", "12-" (and younger), "55+".
struct AgeLabel {
  int age = 0;
  char open = 0;  // 0, '-' or '+'

  friend auto operator<=>(const AgeLabel&, const AgeLabel&) = default;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

int parse_int(std::string_view token, const std::string& where) {
  token = trim(token);
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::NonNumericValue, where + ": '" + std::string(token) + "' is not an integer");
  }
  return value;
}

double parse_double(std::string_view token, const std::string& where) {
  token = trim(token);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::NonNumericValue, where + ": '" + std::string(token) + "' is not a number");
  }
  return value;
}

AgeLabel parse_age(std::string_view token, const std::string& where) {
  token = trim(token);
  AgeLabel label;
  if (!token.empty() && (token.back() == '+' || token.back() == '-')) {
    label.open = token.back();
    token.remove_suffix(1);
  }
  label.age = parse_int(token, where);
  return label;
}

// Accumulates raw cells for one country and assembles the rectangular panel.
class PanelBuilder {
 public:
  void add(int year, AgeLabel age, double rate, const std::string& where) {
    if (rate < 0.0) throw Error(ErrorCode::NegativeRate, where + ": negative rate");
    auto [it, inserted] = cells_[year].emplace(age, rate);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateCell,
                  where + ": duplicate cell for year " + std::to_string(year) + ", age " +
                      std::to_string(age.age));
    }
  }

  bool empty() const { return cells_.empty(); }

  RatePanel build(const std::string& country, const AgeGrid& grid) const {
    if (cells_.empty()) throw Error(ErrorCode::EmptyFile, country + ": no data rows");
    std::vector<int> years;
    for (const auto& [year, _] : cells_) years.push_back(year);
    for (std::size_t i = 1; i < years.size(); ++i) {
      if (years[i] != years[i - 1] + 1) {
        throw Error(ErrorCode::MissingCell, country + ": year " + std::to_string(years[i - 1] + 1) +
                                                " is missing");
      }
    }
    Eigen::MatrixXd rates(static_cast<Eigen::Index>(years.size()), grid.size());
    for (std::size_t t = 0; t < years.size(); ++t) {
      const auto& row = cells_.at(years[t]);
      for (int a = 0; a < grid.size(); ++a) {
        const auto value = lookup(row, grid[a], a == grid.size() - 1);
        if (!value) {
          throw Error(ErrorCode::MissingCell, country + ": year " + std::to_string(years[t]) +
                                                  " lacks age " + std::to_string(grid[a]));
        }
        rates(static_cast<Eigen::Index>(t), a) = *value;
      }
    }
    return RatePanel(country, std::move(years), grid, std::move(rates));
  }

 private:
  // The grid's top age is taken verbatim when present; only when absent are
  // the rows above it (including an open "K+" group) folded into it.
  static std::optional<double> lookup(const std::map<AgeLabel, double>& row, int age, bool top) {
    if (auto it = row.find(AgeLabel{age, 0}); it != row.end()) return it->second;
    if (!top) return std::nullopt;
    std::optional<double> folded;
    for (const auto& [label, rate] : row) {
      const bool above = label.open == '+' ? label.age >= age : (label.open == 0 && label.age > age);
      if (above) folded = folded.value_or(0.0) + rate;
    }
    return folded;
  }

  std::map<int, std::map<AgeLabel, double>> cells_;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

RatePanel load_hfd(const std::filesystem::path& path, const AgeGrid& grid, std::string country) {
  auto in = open_or_throw(path);
  if (country.empty()) {
    country = path.stem().string();
    if (auto dot = country.find('.'); dot != std::string::npos) country.resize(dot);
  }
  PanelBuilder builder;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= 2) continue;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "Year") continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (tokens.size() < 3) {
      throw Error(ErrorCode::NonNumericValue, where + ": expected Year Age ASFR");
    }
    const int year = parse_int(tokens[0], where);
    const AgeLabel age = parse_age(tokens[1], where);
    const double rate = parse_double(tokens[2], where);
    builder.add(year, age, rate, where);
  }
  if (builder.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no data rows");
  return builder.build(country, grid);
}

std::map<std::string, RatePanel> load_csv_long(const std::filesystem::path& path,
                                               const CsvSchema& schema, const AgeGrid& grid) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, path.string() + " is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_csv(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::NonNumericValue, path.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_country = column(schema.country);
  const std::size_t c_year = column(schema.year);
  const std::size_t c_age = column(schema.age);
  const std::size_t c_rate = column(schema.rate);
  const std::size_t width = std::max({c_country, c_year, c_age, c_rate}) + 1;

  std::map<std::string, PanelBuilder> builders;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    if (fields.size() < width) throw Error(ErrorCode::NonNumericValue, where + ": too few fields");
    builders[std::string(fields[c_country])].add(parse_int(fields[c_year], where),
                                                 parse_age(fields[c_age], where),
                                                 parse_double(fields[c_rate], where), where);
  }
  if (builders.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no data rows");

  std::map<std::string, RatePanel> panels;
  for (const auto& [name, builder] : builders) panels.emplace(name, builder.build(name, grid));
  return panels;
}

void write_csv_long(const std::filesystem::path& path, const std::vector<RatePanel>& panels) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "country,year,age,rate\n" << std::setprecision(17);
  for (const auto& panel : panels) {
    for (int t = 0; t < panel.num_years(); ++t) {
      for (int a = 0; a < panel.ages().size(); ++a) {
        out << panel.country() << ',' << panel.years()[static_cast<std::size_t>(t)] << ','
            << panel.ages()[a] << ',' << panel.rates()(t, a) << '\n';
      }
    }
  }
}

}  // namespace fertcast
