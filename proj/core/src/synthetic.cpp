#include "fertcast/synthetic.hpp"

#include "fertcast/error.hpp"

#include <cmath>
#include <random>

namespace fertcast {

double hadwiger(double age, double a, double b, double c) {
  return (a * b / c) * std::pow(c / age, 1.5) * std::exp(-b * b * (c / age + age / c - 2.0));
}

RatePanel synthetic_panel(const std::string& country, const SyntheticOptions& o) {
  if (o.last_year < o.first_year) throw Error(ErrorCode::InvalidArgument, "synthetic year range is empty");
  const int n = o.last_year - o.first_year + 1;
  const int p = o.ages.size();
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> z(0.0, 1.0);

  std::vector<int> years(static_cast<std::size_t>(n));
  Eigen::MatrixXd rates(n, p);
  double level_dev = 0.0;
  double mode_dev = 0.0;
  for (int t = 0; t < n; ++t) {
    years[static_cast<std::size_t>(t)] = o.first_year + t;
    const double frac = n > 1 ? static_cast<double>(t) / (n - 1) : 0.0;
    level_dev += o.level_noise * z(rng);
    mode_dev += o.mode_noise * z(rng);
    const double tfr = (o.tfr_start + frac * (o.tfr_end - o.tfr_start)) * std::exp(level_dev);
    const double mode = o.mode_start + frac * (o.mode_end - o.mode_start) + mode_dev;
    Eigen::RowVectorXd curve(p);
    for (int a = 0; a < p; ++a) curve(a) = hadwiger(o.ages[a] + 0.5, 1.0, o.shape, mode);
    curve *= tfr / curve.sum();
    for (int a = 0; a < p; ++a) rates(t, a) = curve(a) * std::exp(o.cell_noise * z(rng));
  }
  return RatePanel(country, std::move(years), o.ages, std::move(rates));
}

std::vector<RatePanel> synthetic_corpus(int count, const SyntheticOptions& options) {
  std::vector<RatePanel> out;
  for (int i = 1; i <= count; ++i) {
    SyntheticOptions o = options;
    o.seed = options.seed + static_cast<std::uint64_t>(i);
    o.tfr_start += 0.15 * (i - 1);
    o.tfr_end -= 0.05 * (i - 1);
    o.mode_start += 0.4 * (i - 1);
    o.mode_end += 0.3 * (i - 1);
    out.push_back(synthetic_panel("SYN" + std::to_string(i), o));
  }
  return out;
}

}  // namespace fertcast
