#pragma once

// Univariate time-series models: random walk, random walk with drift and
// ARIMA(p,d,q) with automatic order selection.

#include <span>
#include <vector>

namespace fertcast {

enum class UtsKind { RW, RWD, ARIMA };

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;

  friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

/// A fitted univariate model.
///
/// `mean` is the mean of the d-times differenced series: the drift for RWD and
/// for ARIMA(p,1,q) with constant, the level for ARIMA(p,0,q) with constant.
/// `residuals` are the one-step in-sample prediction errors and align with the
/// last `residuals.size()` observations of the fitting series.
struct UtsModel {
  UtsKind kind = UtsKind::RW;
  ArimaOrder order;
  bool has_constant = false;
  double mean = 0.0;
  std::vector<double> ar;
  std::vector<double> ma;
  double innovation_var = 0.0;
  int n = 0;
  double loglik = 0.0;
  double aicc = 0.0;
  std::vector<double> residuals;

  /// Estimated parameters including the innovation variance.
  int parameter_count() const;
  /// Regression-form constant c = mean * (1 - sum(ar)).
  double constant() const;
};

UtsModel fit_rw(std::span<const double> series);
UtsModel fit_rwd(std::span<const double> series);

/// Exact Gaussian maximum likelihood (Kalman filter on the ARMA state space),
/// started from a conditional-sum-of-squares fit. AR and MA coefficients are
/// optimized through the partial-autocorrelation reparameterization, so the
/// result is always causal and invertible.
UtsModel fit_arima(std::span<const double> series, ArimaOrder order, bool with_constant);

/// KPSS level-stationarity statistic with the short Bartlett lag
/// floor(4 (n/100)^(1/4)).
double kpss_statistic(std::span<const double> series);

inline constexpr double kKpssCritical5pct = 0.463;

/// Number of differences chosen by successive KPSS tests at 5%.
int ndiffs(std::span<const double> series, int max_d = 2);

struct SelectOptions {
  int max_p = 5;
  int max_q = 5;
  int max_d = 2;
};

/// Stepwise AICc search (Hyndman-Khandakar). Candidates with an AR or MA root
/// of modulus below 1.01 are discarded. Throws TooShort for fewer than 10
/// observations and NoModelFit when every candidate fails.
UtsModel select_arima(std::span<const double> series, const SelectOptions& options = {});

struct UtsForecast {
  std::vector<double> point;
  std::vector<double> variance;
};

/// h = 1..horizon forecasts. `series` is the series the model was fitted on
/// (ARIMA forecasts need its filtered state; RW/RWD only its last value).
UtsForecast forecast_uts(const UtsModel& model, std::span<const double> series, int horizon);

/// MA(infinity) weights psi_0..psi_{count-1} of the integrated model.
std::vector<double> psi_weights(const UtsModel& model, int count);

}  // namespace fertcast
