#include "fertcast/arima.hpp"
#include "fertcast/error.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

namespace fertcast {
namespace {

std::vector<double> simulate_arma(double phi, double theta, double mean, int n, std::uint64_t seed,
                                  int burn = 200) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> out;
  double prev = 0.0;
  double prev_e = 0.0;
  for (int t = 0; t < n + burn; ++t) {
    const double e = z(rng);
    const double x = phi * prev + e + theta * prev_e;
    prev = x;
    prev_e = e;
    if (t >= burn) out.push_back(mean + x);
  }
  return out;
}

// Exact Gaussian ARMA(1,1) log-likelihood from the dense covariance matrix.
double dense_loglik(const std::vector<double>& y, double mean, double phi, double theta, double sigma2) {
  const int n = static_cast<int>(y.size());
  std::vector<double> gamma(static_cast<std::size_t>(n));
  gamma[0] = sigma2 * (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
  if (n > 1) gamma[1] = sigma2 * (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
  for (int k = 2; k < n; ++k) gamma[static_cast<std::size_t>(k)] = phi * gamma[static_cast<std::size_t>(k - 1)];
  Eigen::MatrixXd cov(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cov(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = y[static_cast<std::size_t>(i)] - mean;
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::MatrixXd l = llt.matrixL();
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + x.dot(llt.solve(x)));
}

TEST(RandomWalk, WorkedExamples) {
  const std::vector<double> flat{3, 3, 3};
  const UtsModel m = fit_rw(flat);
  EXPECT_EQ(m.innovation_var, 0.0);
  const UtsForecast f = forecast_uts(m, flat, 3);
  for (double p : f.point) EXPECT_EQ(p, 3.0);

  const std::vector<double> zig{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(fit_rw(zig).innovation_var, 1.0);
  const std::vector<double> one{1.0};
  EXPECT_THROW(fit_rw(one), Error);
}

TEST(RandomWalkDrift, WorkedExamples) {
  const std::vector<double> line{1, 2, 3, 4, 5};
  const UtsModel m = fit_rwd(line);
  EXPECT_DOUBLE_EQ(m.mean, 1.0);
  EXPECT_DOUBLE_EQ(m.innovation_var, 0.0);
  const UtsForecast f = forecast_uts(m, line, 3);
  EXPECT_DOUBLE_EQ(f.point[0], 6.0);
  EXPECT_DOUBLE_EQ(f.point[2], 8.0);

  const std::vector<double> s{0, 2, 3};
  const UtsModel m2 = fit_rwd(s);
  EXPECT_DOUBLE_EQ(m2.mean, 1.5);
  EXPECT_DOUBLE_EQ(m2.innovation_var, 0.5);

  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(fit_rwd(rev).mean, -1.0);
  const std::vector<double> two{1, 2};
  EXPECT_THROW(fit_rwd(two), Error);
}

TEST(RandomWalk, VarianceAccumulates) {
  const std::vector<double> s{0, 1, 3, 2, 4, 3};
  for (const UtsModel& m : {fit_rw(s), fit_rwd(s)}) {
    const UtsForecast f = forecast_uts(m, s, 4);
    for (int h = 1; h <= 4; ++h) EXPECT_NEAR(f.variance[h - 1], h * m.innovation_var, 1e-15);
  }
}

TEST(Arima, WhiteNoiseWithConstant) {
  const auto y = simulate_arma(0.0, 0.0, 3.0, 200, 1);
  const UtsModel m = fit_arima(y, {0, 0, 0}, true);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= y.size();
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= y.size();
  EXPECT_NEAR(m.mean, mean, 1e-12);
  EXPECT_NEAR(m.innovation_var, var, 1e-12);
}

TEST(Arima, Ar1Recovery) {
  const auto y = simulate_arma(0.7, 0.0, 0.0, 500, 42);
  const UtsModel m = fit_arima(y, {1, 0, 0}, true);
  ASSERT_EQ(m.ar.size(), 1u);
  EXPECT_NEAR(m.ar[0], 0.7, 0.1);
}

TEST(Arima, LikelihoodMatchesDenseCovarianceOracle) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto y = simulate_arma(0.6, 0.3, 1.0, 120, seed);
    const UtsModel m = fit_arima(y, {1, 0, 1}, true);
    ASSERT_EQ(m.ar.size(), 1u);
    ASSERT_EQ(m.ma.size(), 1u);
    const double oracle = dense_loglik(y, m.mean, m.ar[0], m.ma[0], m.innovation_var);
    EXPECT_NEAR(m.loglik, oracle, 1e-6 * std::abs(oracle));
    // The fit is a local maximum of the oracle likelihood.
    for (double d : {-0.02, 0.02}) {
      EXPECT_LE(dense_loglik(y, m.mean, m.ar[0] + d, m.ma[0], m.innovation_var), oracle + 1e-6);
      EXPECT_LE(dense_loglik(y, m.mean, m.ar[0], m.ma[0] + d, m.innovation_var), oracle + 1e-6);
      EXPECT_LE(dense_loglik(y, m.mean + d, m.ar[0], m.ma[0], m.innovation_var), oracle + 1e-6);
    }
  }
}

TEST(Arima, AiccFormula) {
  const auto y = simulate_arma(0.5, 0.0, 0.0, 80, 8);
  const UtsModel m = fit_arima(y, {1, 0, 0}, true);
  const double k = 3.0;
  const double n = 80.0;
  EXPECT_NEAR(m.aicc, -2.0 * m.loglik + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0), 1e-9);
}

TEST(Arima, RandomWalkWithConstantMatchesRwd) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.2, 1.0);
  std::vector<double> y{0.0};
  for (int i = 0; i < 60; ++i) y.push_back(y.back() + z(rng));
  const UtsForecast a = forecast_uts(fit_arima(y, {0, 1, 0}, true), y, 10);
  const UtsForecast b = forecast_uts(fit_rwd(y), y, 10);
  for (int h = 0; h < 10; ++h) EXPECT_NEAR(a.point[h], b.point[h], 1e-6);
}

TEST(Arima, Ar1ForecastClosedForm) {
  UtsModel m;
  m.kind = UtsKind::ARIMA;
  m.order = {1, 0, 0};
  m.ar = {0.5};
  m.innovation_var = 1.0;
  const std::vector<double> y{0.3, -1.0, 2.0};
  const UtsForecast f = forecast_uts(m, y, 3);
  EXPECT_NEAR(f.point[0], 1.0, 1e-12);
  EXPECT_NEAR(f.point[1], 0.5, 1e-12);
  EXPECT_NEAR(f.point[2], 0.25, 1e-12);
  EXPECT_NEAR(f.variance[0], 1.0, 1e-12);
  EXPECT_NEAR(f.variance[1], 1.25, 1e-12);
  EXPECT_NEAR(f.variance[2], 1.3125, 1e-12);
}

TEST(Arima, PsiWeightsMatchImpulseResponse) {
  UtsModel m;
  m.kind = UtsKind::ARIMA;
  m.order = {2, 1, 1};
  m.ar = {0.4, -0.2};
  m.ma = {0.3};
  // Impulse response of (1 - 0.4B + 0.2B^2)(1 - B) y = (1 + 0.3B) e with e_0 = 1.
  const int count = 12;
  std::vector<double> e(count, 0.0);
  e[0] = 1.0;
  std::vector<double> w(count, 0.0);  // differenced series
  std::vector<double> y(count, 0.0);
  for (int t = 0; t < count; ++t) {
    w[t] = e[t] + (t >= 1 ? 0.3 * e[t - 1] : 0.0) + (t >= 1 ? 0.4 * w[t - 1] : 0.0) -
           (t >= 2 ? 0.2 * w[t - 2] : 0.0);
    y[t] = w[t] + (t >= 1 ? y[t - 1] : 0.0);
  }
  const auto psi = psi_weights(m, count);
  for (int i = 0; i < count; ++i) EXPECT_NEAR(psi[i], y[i], 1e-12) << i;
}

TEST(Arima, ForecastShiftEquivariantAndVarianceMonotone) {
  const auto y = simulate_arma(0.5, 0.4, 2.0, 150, 21);
  std::vector<double> shifted = y;
  for (double& v : shifted) v += 10.0;
  const UtsModel a = fit_arima(y, {1, 0, 1}, true);
  const UtsModel b = fit_arima(shifted, {1, 0, 1}, true);
  const UtsForecast fa = forecast_uts(a, y, 8);
  const UtsForecast fb = forecast_uts(b, shifted, 8);
  for (int h = 0; h < 8; ++h) {
    EXPECT_NEAR(fb.point[h], fa.point[h] + 10.0, 1e-4);
    EXPECT_NEAR(fb.variance[h], fa.variance[h], 1e-4 * fa.variance[h]);
    if (h > 0) EXPECT_GE(fa.variance[h], fa.variance[h - 1]);
  }
  for (const UtsModel& m : {fit_rw(y), fit_rwd(y)}) {
    std::vector<double> z = y;
    for (double& v : z) v -= 4.0;
    const UtsForecast f1 = forecast_uts(m, y, 5);
    const UtsModel m2 = m.kind == UtsKind::RW ? fit_rw(z) : fit_rwd(z);
    const UtsForecast f2 = forecast_uts(m2, z, 5);
    for (int h = 0; h < 5; ++h) {
      EXPECT_NEAR(f2.point[h], f1.point[h] - 4.0, 1e-9);
      EXPECT_NEAR(f2.variance[h], f1.variance[h], 1e-12);
    }
  }
}

TEST(Kpss, MatchesDirectFormula) {
  const auto y = simulate_arma(0.3, 0.0, 0.0, 150, 13);
  const int n = static_cast<int>(y.size());
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) e[i] = y[i] - mean;
  double partial = 0.0;
  double num = 0.0;
  for (double v : e) {
    partial += v;
    num += partial * partial;
  }
  const int lag = static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 0.25)));
  double s2 = 0.0;
  for (double v : e) s2 += v * v;
  for (int k = 1; k <= lag; ++k) {
    double c = 0.0;
    for (int t = k; t < n; ++t) c += e[t] * e[t - k];
    s2 += 2.0 * (1.0 - k / (lag + 1.0)) * c;
  }
  s2 /= n;
  EXPECT_NEAR(kpss_statistic(y), num / (static_cast<double>(n) * n * s2), 1e-10);
}

TEST(SelectArima, ConstantSeries) {
  const std::vector<double> c(30, 1.7);
  const UtsModel m = select_arima(c);
  EXPECT_EQ(m.order, (ArimaOrder{0, 0, 0}));
  EXPECT_EQ(m.innovation_var, 0.0);
  const UtsForecast f = forecast_uts(m, c, 4);
  for (double p : f.point) EXPECT_NEAR(p, 1.7, 1e-12);
}

TEST(SelectArima, StrongAutoregressionAndRandomWalk) {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    const auto ar = simulate_arma(0.8, 0.0, 0.0, 300, seed);
    const UtsModel m = select_arima(ar);
    EXPECT_EQ(m.order.d, 0);
    EXPECT_GE(m.order.p + m.order.q, 1);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> rw{0.0};
    for (int i = 0; i < 199; ++i) rw.push_back(rw.back() + z(rng));
    EXPECT_GE(select_arima(rw).order.d, 1);
  }
}

TEST(SelectArima, TooShort) {
  const std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(select_arima(s), Error);
}

TEST(SelectArima, SelectedModelsAreCausalAndInvertible) {
  for (std::uint64_t seed = 50; seed < 55; ++seed) {
    const auto y = simulate_arma(0.9, -0.5, 0.0, 100, seed);
    const UtsModel m = select_arima(y);
    // Companion-matrix spectral radius below one for the AR and MA parts.
    auto radius = [](const std::vector<double>& c) {
      if (c.empty()) return 0.0;
      const int k = static_cast<int>(c.size());
      Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(k, k);
      for (int i = 0; i < k; ++i) comp(0, i) = c[i];
      for (int i = 1; i < k; ++i) comp(i, i - 1) = 1.0;
      return comp.eigenvalues().cwiseAbs().maxCoeff();
    };
    std::vector<double> neg_ma = m.ma;
    for (double& v : neg_ma) v = -v;
    EXPECT_LT(radius(m.ar), 1.0);
    EXPECT_LT(radius(neg_ma), 1.0);
  }
}

}  // namespace
}  // namespace fertcast
