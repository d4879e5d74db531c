#include "fertcast/arima.hpp"

#include "fertcast/error.hpp"
#include "fertcast/optim.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <tuple>

namespace fertcast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRootTolerance = 1e-6;
// Selection skips candidates with an AR or MA root closer to the unit circle.
constexpr double kSelectionMinRoot = 1.01;

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> out(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    for (std::size_t i = out.size() - 1; i > 0; --i) out[i] -= out[i - 1];
    out.erase(out.begin());
  }
  return out;
}

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double gaussian_loglik(double sigma2, int n) {
  if (sigma2 <= 0.0) return kInf;
  return -0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
}

double aicc_of(double loglik, int k, int n_eff) {
  if (loglik == kInf) return -kInf;
  const double denom = n_eff - k - 1;
  if (denom <= 0.0) return kInf;
  return -2.0 * loglik + 2.0 * k + 2.0 * k * (k + 1.0) / denom;
}

// Partial autocorrelations in (-1, 1) -> coefficients of a causal AR
// polynomial (Durbin-Levinson recursion).
std::vector<double> pacf_to_coefficients(std::span<const double> unconstrained) {
  const std::size_t p = unconstrained.size();
  std::vector<double> phi(p);
  std::vector<double> work(p);
  for (std::size_t k = 0; k < p; ++k) {
    const double r = std::tanh(unconstrained[k]);
    phi[k] = r;
    for (std::size_t j = 0; j < k; ++j) work[j] = phi[j] - r * phi[k - 1 - j];
    for (std::size_t j = 0; j < k; ++j) phi[j] = work[j];
  }
  return phi;
}

// Smallest modulus among the roots of 1 - c1 z - ... - cp z^p.
double min_root_modulus(const std::vector<double>& c) {
  std::size_t p = c.size();
  while (p > 0 && c[p - 1] == 0.0) --p;
  if (p == 0) return kInf;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) companion(0, static_cast<Eigen::Index>(i)) = c[i];
  for (std::size_t i = 1; i < p; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  const Eigen::VectorXcd inverse_roots = companion.eigenvalues();
  double max_inv = 0.0;
  for (Eigen::Index i = 0; i < inverse_roots.size(); ++i) max_inv = std::max(max_inv, std::abs(inverse_roots(i)));
  return max_inv > 0.0 ? 1.0 / max_inv : kInf;
}

struct FilterResult {
  double sum_sq = 0.0;     // sum v_t^2 / F_t
  double sum_log_f = 0.0;  // sum log F_t
  std::vector<double> innovations;
  Eigen::VectorXd next_state;  // a_{m+1|m}
  bool ok = true;
};

// Kalman filter for a zero-mean ARMA(p,q) in the r = max(p, q+1) state form
//   alpha_{t+1} = T alpha_t + R eps_{t+1},  y_t = alpha_t[0],
// initialized at the stationary covariance. Innovation variances F_t are in
// units of sigma^2.
FilterResult arma_filter(std::span<const double> y, const std::vector<double>& ar,
                         const std::vector<double>& ma, bool keep_innovations) {
  const int p = static_cast<int>(ar.size());
  const int q = static_cast<int>(ma.size());
  const int r = std::max(p, q + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < p; ++i) t(i, 0) = ar[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < r; ++i) t(i, i + 1) = 1.0;
  Eigen::VectorXd rvec = Eigen::VectorXd::Zero(r);
  rvec(0) = 1.0;
  for (int j = 0; j < q; ++j) rvec(j + 1) = ma[static_cast<std::size_t>(j)];
  const Eigen::MatrixXd rr = rvec * rvec.transpose();

  FilterResult out;
  // Stationary covariance: (I - T (x) T) vec(P) = vec(RR').
  Eigen::MatrixXd p_mat;
  if (r == 1) {
    const double phi = t(0, 0);
    const double denom = 1.0 - phi * phi;
    if (denom <= 0.0) {
      out.ok = false;
      return out;
    }
    p_mat = Eigen::MatrixXd::Constant(1, 1, rr(0, 0) / denom);
  } else {
    const int r2 = r * r;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(r2, r2);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          for (int l = 0; l < r; ++l) lhs(i * r + k, j * r + l) -= t(i, j) * t(k, l);
    Eigen::VectorXd rhs(r2);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k) rhs(i * r + k) = rr(i, k);
    const Eigen::VectorXd vec_p = lhs.partialPivLu().solve(rhs);
    p_mat.resize(r, r);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k) p_mat(i, k) = vec_p(i * r + k);
  }

  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  if (keep_innovations) out.innovations.reserve(y.size());
  for (double obs : y) {
    const double f = p_mat(0, 0);
    if (!(f > 0.0) || !std::isfinite(f)) {
      out.ok = false;
      return out;
    }
    const double v = obs - a(0);
    out.sum_sq += v * v / f;
    out.sum_log_f += std::log(f);
    if (keep_innovations) out.innovations.push_back(v);
    const Eigen::VectorXd k = p_mat.col(0) / f;
    a += k * v;
    p_mat -= k * p_mat.row(0);
    a = t * a;
    p_mat = t * p_mat * t.transpose() + rr;
  }
  out.next_state = a;
  return out;
}

struct ArmaParams {
  std::vector<double> ar;
  std::vector<double> ma;
  double mean = 0.0;
};

ArmaParams unpack(const Eigen::VectorXd& theta, int p, int q, bool constant) {
  ArmaParams out;
  out.ar = pacf_to_coefficients({theta.data(), static_cast<std::size_t>(p)});
  auto ma = pacf_to_coefficients({theta.data() + p, static_cast<std::size_t>(q)});
  for (double& m : ma) m = -m;  // 1 + sum theta z^j invertible <=> 1 - sum(-theta) z^j causal
  out.ma = std::move(ma);
  if (constant) out.mean = theta(p + q);
  return out;
}

// Conditional sum of squares objective: residual recursion started at t = p
// with zero pre-sample innovations.
double css_objective(std::span<const double> w, const ArmaParams& prm) {
  const std::size_t p = prm.ar.size();
  const std::size_t q = prm.ma.size();
  std::vector<double> e(w.size(), 0.0);
  double ss = 0.0;
  for (std::size_t t = p; t < w.size(); ++t) {
    double pred = prm.mean;
    for (std::size_t i = 0; i < p; ++i) pred += prm.ar[i] * (w[t - 1 - i] - prm.mean);
    for (std::size_t j = 0; j < q && j < t; ++j) pred += prm.ma[j] * e[t - 1 - j];
    e[t] = w[t] - pred;
    ss += e[t] * e[t];
  }
  const double m = static_cast<double>(w.size() - p);
  if (!(ss > 0.0)) return kInf;
  return 0.5 * m * std::log(ss / m);
}

double ml_objective(std::span<const double> w, const ArmaParams& prm) {
  std::vector<double> centered(w.begin(), w.end());
  for (double& v : centered) v -= prm.mean;
  const FilterResult f = arma_filter(centered, prm.ar, prm.ma, false);
  if (!f.ok) return kInf;
  const double m = static_cast<double>(w.size());
  if (!(f.sum_sq > 0.0)) return kInf;
  return 0.5 * (m * std::log(f.sum_sq / m) + f.sum_log_f);
}

}  // namespace

int UtsModel::parameter_count() const {
  switch (kind) {
    case UtsKind::RW: return 1;
    case UtsKind::RWD: return 2;
    case UtsKind::ARIMA: return order.p + order.q + (has_constant ? 1 : 0) + 1;
  }
  return 1;
}

double UtsModel::constant() const {
  return mean * (1.0 - std::accumulate(ar.begin(), ar.end(), 0.0));
}

UtsModel fit_rw(std::span<const double> series) {
  if (series.size() < 2) throw Error(ErrorCode::TooShort, "random walk needs at least 2 observations");
  UtsModel m;
  m.kind = UtsKind::RW;
  m.order = {0, 1, 0};
  m.n = static_cast<int>(series.size());
  m.residuals = difference(series, 1);
  double ss = 0.0;
  for (double e : m.residuals) ss += e * e;
  m.innovation_var = ss / static_cast<double>(m.residuals.size());
  m.loglik = gaussian_loglik(m.innovation_var, static_cast<int>(m.residuals.size()));
  m.aicc = aicc_of(m.loglik, 1, static_cast<int>(m.residuals.size()));
  return m;
}

UtsModel fit_rwd(std::span<const double> series) {
  if (series.size() < 3) throw Error(ErrorCode::TooShort, "random walk with drift needs at least 3 observations");
  UtsModel m;
  m.kind = UtsKind::RWD;
  m.order = {0, 1, 0};
  m.has_constant = true;
  m.n = static_cast<int>(series.size());
  const double steps = static_cast<double>(series.size() - 1);
  m.mean = (series.back() - series.front()) / steps;
  m.residuals = difference(series, 1);
  double ss = 0.0;
  for (double& e : m.residuals) {
    e -= m.mean;
    ss += e * e;
  }
  m.innovation_var = ss / (steps - 1.0);
  m.loglik = gaussian_loglik(ss / steps, static_cast<int>(steps));
  m.aicc = aicc_of(m.loglik, 2, static_cast<int>(steps));
  return m;
}

UtsModel fit_arima(std::span<const double> series, ArimaOrder order, bool with_constant) {
  const int p = order.p;
  const int d = order.d;
  const int q = order.q;
  if (p < 0 || q < 0 || d < 0 || d > 2) throw Error(ErrorCode::InvalidArgument, "invalid ARIMA order");
  if (static_cast<int>(series.size()) < p + q + d + 2) {
    throw Error(ErrorCode::TooShort, "series too short for the requested ARIMA order");
  }
  const std::vector<double> w = difference(series, d);
  const int m = static_cast<int>(w.size());

  UtsModel model;
  model.kind = UtsKind::ARIMA;
  model.order = order;
  model.has_constant = with_constant;
  model.n = static_cast<int>(series.size());
  const int k = p + q + (with_constant ? 1 : 0) + 1;

  if (p == 0 && q == 0) {
    model.mean = with_constant ? mean_of(w) : 0.0;
    double ss = 0.0;
    model.residuals.resize(w.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
      model.residuals[t] = w[t] - model.mean;
      ss += model.residuals[t] * model.residuals[t];
    }
    model.innovation_var = ss / m;
    model.loglik = gaussian_loglik(model.innovation_var, m);
    model.aicc = aicc_of(model.loglik, k, m);
    return model;
  }

  if (is_constant(w)) throw Error(ErrorCode::NonConvergence, "differenced series is constant");

  const int dim = p + q + (with_constant ? 1 : 0);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  if (with_constant) theta(p + q) = mean_of(w);

  const auto css = [&](const Eigen::VectorXd& x) { return css_objective(w, unpack(x, p, q, with_constant)); };
  const auto ml = [&](const Eigen::VectorXd& x) { return ml_objective(w, unpack(x, p, q, with_constant)); };

  // Keep the CSS start away from the unit circle so ML starts well inside.
  MinimizeResult start = minimize_bfgs(css, theta, {100, 1e-4, 1e-8});
  Eigen::VectorXd x0 = start.x;
  for (Eigen::Index i = 0; i < p + q; ++i) x0(i) = std::clamp(x0(i), -2.0, 2.0);
  if (!std::isfinite(ml(x0))) x0 = theta;
  const MinimizeResult fit = minimize_bfgs(ml, x0, {200, 1e-5, 1e-10});
  if (!std::isfinite(fit.value)) throw Error(ErrorCode::NonConvergence, "likelihood optimization failed");

  const ArmaParams prm = unpack(fit.x, p, q, with_constant);
  if (min_root_modulus(prm.ar) < 1.0 + kRootTolerance) {
    throw Error(ErrorCode::NonInvertible, "AR polynomial has a root on the unit circle");
  }
  std::vector<double> neg_ma(prm.ma);
  for (double& v : neg_ma) v = -v;
  if (min_root_modulus(neg_ma) < 1.0 + kRootTolerance) {
    throw Error(ErrorCode::NonInvertible, "MA polynomial has a root on the unit circle");
  }

  std::vector<double> centered(w);
  for (double& v : centered) v -= prm.mean;
  const FilterResult f = arma_filter(centered, prm.ar, prm.ma, true);
  if (!f.ok) throw Error(ErrorCode::NonConvergence, "Kalman filter failed at the optimum");

  model.ar = prm.ar;
  model.ma = prm.ma;
  model.mean = prm.mean;
  model.innovation_var = f.sum_sq / m;
  model.loglik = -0.5 * (m * (std::log(2.0 * std::numbers::pi * model.innovation_var) + 1.0) + f.sum_log_f);
  model.aicc = aicc_of(model.loglik, k, m);
  model.residuals = f.innovations;
  return model;
}

double kpss_statistic(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorCode::TooShort, "KPSS needs at least 2 observations");
  const double mu = mean_of(series);
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = series[i] - mu;
  double s = 0.0;
  double eta = 0.0;
  double gamma0 = 0.0;
  for (double v : e) {
    s += v;
    eta += s * s;
    gamma0 += v * v;
  }
  const double nd = static_cast<double>(n);
  eta /= nd * nd;
  double long_run = gamma0 / nd;
  const int lags = static_cast<int>(std::floor(4.0 * std::pow(nd / 100.0, 0.25)));
  for (int l = 1; l <= lags && static_cast<std::size_t>(l) < n; ++l) {
    double acc = 0.0;
    for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t) acc += e[t] * e[t - static_cast<std::size_t>(l)];
    long_run += 2.0 * (1.0 - l / (lags + 1.0)) * acc / nd;
  }
  if (!(long_run > 0.0)) return 0.0;
  return eta / long_run;
}

int ndiffs(std::span<const double> series, int max_d) {
  std::vector<double> x(series.begin(), series.end());
  int d = 0;
  while (d < max_d && x.size() >= 3 && !is_constant(x)) {
    if (kpss_statistic(x) <= kKpssCritical5pct) break;
    x = difference(x, 1);
    ++d;
  }
  return d;
}

UtsModel select_arima(std::span<const double> series, const SelectOptions& options) {
  if (series.size() < 10) throw Error(ErrorCode::TooShort, "automatic ARIMA needs at least 10 observations");
  if (is_constant(series)) {
    UtsModel m;
    m.kind = UtsKind::ARIMA;
    m.has_constant = true;
    m.mean = series.front();
    m.n = static_cast<int>(series.size());
    m.residuals.assign(series.size(), 0.0);
    m.loglik = kInf;
    m.aicc = -kInf;
    return m;
  }

  const int d = ndiffs(series, options.max_d);
  const bool allow_constant = d <= 1;
  const int n = static_cast<int>(series.size());

  using Key = std::tuple<int, int, bool>;
  std::map<Key, std::optional<UtsModel>> cache;
  auto evaluate = [&](int p, int q, bool c) -> const std::optional<UtsModel>& {
    const Key key{p, q, c};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    std::optional<UtsModel> fitted;
    if (p >= 0 && q >= 0 && p <= options.max_p && q <= options.max_q && (allow_constant || !c) &&
        p + q + d + 2 <= n) {
      try {
        fitted = fit_arima(series, {p, d, q}, c);
        if (!std::isfinite(fitted->aicc) && fitted->aicc > 0) fitted.reset();
        if (fitted) {
          std::vector<double> neg_ma(fitted->ma);
          for (double& v : neg_ma) v = -v;
          if (std::min(min_root_modulus(fitted->ar), min_root_modulus(neg_ma)) < kSelectionMinRoot) fitted.reset();
        }
      } catch (const Error&) {
        fitted.reset();
      }
    }
    return cache.emplace(key, std::move(fitted)).first->second;
  };
  // AICc first; near-ties go to fewer parameters, then lower q.
  auto better = [](const UtsModel& a, const UtsModel& b) {
    const double tol = 1e-9 * std::max(1.0, std::abs(b.aicc));
    if (a.aicc < b.aicc - tol) return true;
    if (a.aicc > b.aicc + tol) return false;
    if (a.parameter_count() != b.parameter_count()) return a.parameter_count() < b.parameter_count();
    return a.order.q < b.order.q;
  };

  std::optional<UtsModel> best;
  auto consider = [&](int p, int q, bool c) {
    const auto& m = evaluate(p, q, c);
    if (m && (!best || better(*m, *best))) {
      best = *m;
      return true;
    }
    return false;
  };

  consider(2, 2, allow_constant);
  consider(0, 0, allow_constant);
  consider(1, 0, allow_constant);
  consider(0, 1, allow_constant);
  if (allow_constant) consider(0, 0, false);

  for (int step = 0; best && step < 94; ++step) {
    const int p = best->order.p;
    const int q = best->order.q;
    const bool c = best->has_constant;
    const std::array<std::tuple<int, int, bool>, 9> neighbours{{{p - 1, q, c},
                                                                {p + 1, q, c},
                                                                {p, q - 1, c},
                                                                {p, q + 1, c},
                                                                {p - 1, q - 1, c},
                                                                {p + 1, q + 1, c},
                                                                {p - 1, q + 1, c},
                                                                {p + 1, q - 1, c},
                                                                {p, q, !c}}};
    bool improved = false;
    for (const auto& [np, nq, nc] : neighbours) {
      if (consider(np, nq, nc)) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!best) throw Error(ErrorCode::NoModelFit, "no ARIMA candidate could be fitted");
  return *best;
}

std::vector<double> psi_weights(const UtsModel& model, int count) {
  // phi*(B) = phi(B) (1 - B)^d
  std::vector<double> poly(model.ar.size() + 1, 1.0);
  for (std::size_t i = 0; i < model.ar.size(); ++i) poly[i + 1] = -model.ar[i];
  for (int k = 0; k < model.order.d; ++k) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i];
    }
    poly = std::move(next);
  }
  std::vector<double> psi(static_cast<std::size_t>(std::max(count, 0)), 0.0);
  for (int j = 0; j < count; ++j) {
    double v = j == 0 ? 1.0 : (j <= static_cast<int>(model.ma.size()) ? model.ma[static_cast<std::size_t>(j - 1)] : 0.0);
    for (int i = 1; i < static_cast<int>(poly.size()) && i <= j; ++i) {
      v -= poly[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(j - i)];
    }
    psi[static_cast<std::size_t>(j)] = v;
  }
  return psi;
}

UtsForecast forecast_uts(const UtsModel& model, std::span<const double> series, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "forecast horizon must be at least 1");
  if (series.empty()) throw Error(ErrorCode::TooShort, "cannot forecast an empty series");
  UtsForecast out;
  out.point.resize(static_cast<std::size_t>(horizon));
  out.variance.resize(static_cast<std::size_t>(horizon));

  if (model.kind != UtsKind::ARIMA) {
    const double drift = model.kind == UtsKind::RWD ? model.mean : 0.0;
    for (int h = 1; h <= horizon; ++h) {
      out.point[static_cast<std::size_t>(h - 1)] = series.back() + drift * h;
      out.variance[static_cast<std::size_t>(h - 1)] = h * model.innovation_var;
    }
    return out;
  }

  const int d = model.order.d;
  if (static_cast<int>(series.size()) <= d) throw Error(ErrorCode::TooShort, "series shorter than d");
  // Differencing levels: level[k] is the k-times differenced series.
  std::vector<std::vector<double>> level{std::vector<double>(series.begin(), series.end())};
  for (int k = 0; k < d; ++k) level.push_back(difference(level.back(), 1));

  std::vector<double> w_forecast(static_cast<std::size_t>(horizon), model.mean);
  if (!model.ar.empty() || !model.ma.empty()) {
    std::vector<double> centered(level.back());
    for (double& v : centered) v -= model.mean;
    const FilterResult f = arma_filter(centered, model.ar, model.ma, false);
    if (!f.ok) throw Error(ErrorCode::NonConvergence, "Kalman filter failed while forecasting");
    const int r = static_cast<int>(f.next_state.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
    for (std::size_t i = 0; i < model.ar.size(); ++i) t(static_cast<Eigen::Index>(i), 0) = model.ar[i];
    for (int i = 0; i + 1 < r; ++i) t(i, i + 1) = 1.0;
    Eigen::VectorXd a = f.next_state;
    for (int h = 0; h < horizon; ++h) {
      w_forecast[static_cast<std::size_t>(h)] = model.mean + a(0);
      a = t * a;
    }
  }
  // Undo the differencing, innermost level first.
  std::vector<double> current = w_forecast;
  for (int k = d - 1; k >= 0; --k) {
    double last = level[static_cast<std::size_t>(k)].back();
    for (double& v : current) {
      last += v;
      v = last;
    }
  }
  out.point = current;

  const std::vector<double> psi = psi_weights(model, horizon);
  double acc = 0.0;
  for (int h = 0; h < horizon; ++h) {
    acc += psi[static_cast<std::size_t>(h)] * psi[static_cast<std::size_t>(h)];
    out.variance[static_cast<std::size_t>(h)] = model.innovation_var * acc;
  }
  return out;
}

}  // namespace fertcast
