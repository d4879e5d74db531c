#include "fertcast/mcs.hpp"

#include "fertcast/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fertcast {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct ArFit {
  int significant = 0;
  double aicc = std::numeric_limits<double>::infinity();
};

// OLS AR(p) with intercept on the common sample t = max_p..n-1.
ArFit fit_ar_ols(const Eigen::VectorXd& d, int p, int max_p) {
  const int n = static_cast<int>(d.size());
  const int rows = n - max_p;
  const int k = p + 1;
  ArFit out;
  if (rows - k - 1 <= 0) return out;
  Eigen::MatrixXd x(rows, k);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = r + max_p;
    y(r) = d(t);
    x(r, 0) = 1.0;
    for (int i = 1; i <= p; ++i) x(r, i) = d(t - i);
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
  const Eigen::VectorXd beta = ldlt.solve(x.transpose() * y);
  const double rss = (y - x * beta).squaredNorm();
  if (!(rss > 0.0)) return out;
  const double sigma2 = rss / (rows - k);
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(k, k)) * sigma2;
  for (int i = 1; i <= p; ++i) {
    const double se = std::sqrt(std::max(cov(i, i), 0.0));
    if (se > 0.0 && std::abs(beta(i)) > 2.0 * se) ++out.significant;
  }
  const double kk = k + 1.0;  // coefficients plus variance
  out.aicc = rows * std::log(rss / rows) + 2.0 * kk + 2.0 * kk * (kk + 1.0) / (rows - kk - 1.0);
  return out;
}

double safe_ratio(double num, double var) {
  if (var > 0.0) return num / std::sqrt(var);
  if (num == 0.0) return 0.0;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<int> block_bootstrap_indices(int n, int block_length, std::uint64_t seed,
                                         std::uint64_t replicate) {
  const int l = std::clamp(block_length, 1, n);
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(replicate + 1)));
  const auto starts = static_cast<std::uint64_t>(n - l + 1);
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(idx.size()) < n) {
    const int s = static_cast<int>(rng() % starts);
    for (int j = 0; j < l && static_cast<int>(idx.size()) < n; ++j) idx.push_back(s + j);
  }
  return idx;
}

int auto_block_length(const Eigen::MatrixXd& losses) {
  const int models = static_cast<int>(losses.rows());
  const int n = static_cast<int>(losses.cols());
  const int max_p = std::clamp((n - 4) / 3, 0, 10);
  int block = 1;
  for (int a = 0; a < models; ++a) {
    for (int b = a + 1; b < models; ++b) {
      const Eigen::VectorXd d = (losses.row(a) - losses.row(b)).transpose();
      if ((d.array() == d(0)).all()) continue;
      ArFit best;
      for (int p = 0; p <= max_p; ++p) {
        const ArFit fit = fit_ar_ols(d, p, max_p);
        if (fit.aicc < best.aicc) best = fit;
      }
      block = std::max(block, best.significant);
    }
  }
  return block;
}

McsResult mcs_select(const Eigen::MatrixXd& losses, const McsOptions& options) {
  const int models = static_cast<int>(losses.rows());
  const int n = static_cast<int>(losses.cols());
  if (models < 2) throw Error(ErrorCode::InvalidArgument, "MCS needs at least two models");
  if (n < 10) throw Error(ErrorCode::TooFewPeriods, "MCS needs at least 10 loss periods");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "MCS alpha must lie in (0, 1)");
  }
  if (options.bootstrap < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap count must be positive");
  if (!losses.allFinite()) throw Error(ErrorCode::NonNumericValue, "non-finite losses");

  McsResult result;
  result.statistic = options.statistic;
  result.alpha = options.alpha;
  result.bootstrap = options.bootstrap;
  result.seed = options.seed;
  result.block_length = options.block_length > 0 ? options.block_length : auto_block_length(losses);

  const int big_b = options.bootstrap;
  const Eigen::VectorXd mean_loss = losses.rowwise().mean();
  // boot_mean(b, l): model l's mean loss in bootstrap replicate b.
  Eigen::MatrixXd boot_mean(big_b, models);
  detail::parallel_for(big_b, options.threads, [&](int b) {
    const auto idx = block_bootstrap_indices(n, result.block_length, options.seed, static_cast<std::uint64_t>(b));
    for (int l = 0; l < models; ++l) {
      double s = 0.0;
      for (int t : idx) s += losses(l, t);
      boot_mean(b, l) = s / n;
    }
  });

  std::vector<int> set(static_cast<std::size_t>(models));
  for (int l = 0; l < models; ++l) set[static_cast<std::size_t>(l)] = l;

  while (set.size() > 1) {
    const int m = static_cast<int>(set.size());
    bool degenerate = true;
    for (int i = 1; i < m && degenerate; ++i) {
      degenerate = (losses.row(set[static_cast<std::size_t>(i)]).array() ==
                    losses.row(set[0]).array()).all();
    }
    if (degenerate) {
      result.final_p_value = 1.0;
      break;
    }

    double statistic = -std::numeric_limits<double>::infinity();
    std::vector<double> boot_stat(static_cast<std::size_t>(big_b), -std::numeric_limits<double>::infinity());
    int worst = set[0];

    if (options.statistic == McsStatistic::Range) {
      // Pairwise t statistics; the bootstrap distribution of max |t*| is
      // computed from recentered replicate differentials.
      Eigen::MatrixXd tstat = Eigen::MatrixXd::Zero(m, m);
      Eigen::MatrixXd var = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          const int a = set[static_cast<std::size_t>(i)];
          const int c = set[static_cast<std::size_t>(j)];
          const double dbar = mean_loss(a) - mean_loss(c);
          double v = 0.0;
          for (int b = 0; b < big_b; ++b) {
            const double dev = boot_mean(b, a) - boot_mean(b, c) - dbar;
            v += dev * dev;
          }
          v /= big_b;
          var(i, j) = var(j, i) = v;
          tstat(i, j) = safe_ratio(dbar, v);
          tstat(j, i) = -tstat(i, j);
          statistic = std::max(statistic, std::abs(tstat(i, j)));
        }
      }
      for (int b = 0; b < big_b; ++b) {
        double mx = 0.0;
        for (int i = 0; i < m; ++i) {
          for (int j = i + 1; j < m; ++j) {
            const int a = set[static_cast<std::size_t>(i)];
            const int c = set[static_cast<std::size_t>(j)];
            const double dev = boot_mean(b, a) - boot_mean(b, c) - (mean_loss(a) - mean_loss(c));
            const double t = var(i, j) > 0.0 ? std::abs(dev) / std::sqrt(var(i, j)) : 0.0;
            mx = std::max(mx, t);
          }
        }
        boot_stat[static_cast<std::size_t>(b)] = mx;
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        double sup = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
          if (j != i) sup = std::max(sup, tstat(i, j));
        }
        if (sup > best) {
          best = sup;
          worst = set[static_cast<std::size_t>(i)];
        }
      }
    } else {
      // d_{l.} = (1/(m-1)) sum_tau d_{l,tau} = m/(m-1) (L_l - mean over the set).
      const double scale = static_cast<double>(m) / (m - 1);
      auto relative = [&](auto&& mean_of_model, int i) {
        double avg = 0.0;
        for (int k : set) avg += mean_of_model(k);
        avg /= m;
        return scale * (mean_of_model(set[static_cast<std::size_t>(i)]) - avg);
      };
      std::vector<double> dbar(static_cast<std::size_t>(m));
      std::vector<double> var(static_cast<std::size_t>(m), 0.0);
      for (int i = 0; i < m; ++i) dbar[static_cast<std::size_t>(i)] = relative([&](int k) { return mean_loss(k); }, i);
      Eigen::MatrixXd dev(big_b, m);
      for (int b = 0; b < big_b; ++b) {
        for (int i = 0; i < m; ++i) {
          dev(b, i) = relative([&](int k) { return boot_mean(b, k); }, i) - dbar[static_cast<std::size_t>(i)];
          var[static_cast<std::size_t>(i)] += dev(b, i) * dev(b, i);
        }
      }
      double best = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        var[static_cast<std::size_t>(i)] /= big_b;
        const double t = safe_ratio(dbar[static_cast<std::size_t>(i)], var[static_cast<std::size_t>(i)]);
        if (t > best) {
          best = t;
          worst = set[static_cast<std::size_t>(i)];
        }
      }
      statistic = best;
      for (int b = 0; b < big_b; ++b) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
          const double v = var[static_cast<std::size_t>(i)];
          mx = std::max(mx, v > 0.0 ? dev(b, i) / std::sqrt(v) : 0.0);
        }
        boot_stat[static_cast<std::size_t>(b)] = mx;
      }
    }

    const auto exceed = std::count_if(boot_stat.begin(), boot_stat.end(),
                                      [&](double s) { return s >= statistic; });
    const double p_value = static_cast<double>(exceed) / big_b;
    if (p_value >= options.alpha) {
      result.final_p_value = p_value;
      break;
    }
    result.eliminated.push_back({worst, p_value});
    set.erase(std::find(set.begin(), set.end(), worst));
  }
  result.survivors = set;
  return result;
}

}  // namespace fertcast
