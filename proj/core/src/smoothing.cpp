#include "fertcast/smoothing.hpp"

#include "fertcast/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fertcast {

SplineSmoother::SplineSmoother(const AgeGrid& ages) : ages_(ages) {
  const int p = ages.size();
  if (p < 3) throw Error(ErrorCode::SingularSystem, "spline smoothing needs at least 3 ages");

  std::vector<double> h(static_cast<std::size_t>(p - 1));
  for (int i = 0; i + 1 < p; ++i) h[static_cast<std::size_t>(i)] = ages[i + 1] - ages[i];

  // Q: p x (p-2) second divided differences; R: (p-2) x (p-2) tridiagonal.
  const int m = p - 2;
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, m);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    const double h0 = h[static_cast<std::size_t>(j)];
    const double h1 = h[static_cast<std::size_t>(j + 1)];
    q(j, j) = 1.0 / h0;
    q(j + 1, j) = -1.0 / h0 - 1.0 / h1;
    q(j + 2, j) = 1.0 / h1;
    r(j, j) = (h0 + h1) / 3.0;
    if (j + 1 < m) {
      r(j, j + 1) = h1 / 6.0;
      r(j + 1, j) = h1 / 6.0;
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "spline band matrix");
  const Eigen::MatrixXd k = q * llt.solve(q.transpose());

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "penalty eigensolve");
  basis_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues();
  const double cut = 1e-10 * eigenvalues_.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_(i) < cut) eigenvalues_(i) = 0.0;
  }
}

Eigen::VectorXd SplineSmoother::fit_coefficients(const Eigen::VectorXd& coef, double penalty) const {
  Eigen::VectorXd shrunk(coef.size());
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    shrunk(i) = coef(i) / (1.0 + penalty * eigenvalues_(i));
  }
  return shrunk;
}

double SplineSmoother::gcv(const Eigen::VectorXd& curve, double penalty) const {
  const Eigen::VectorXd coef = basis_.transpose() * curve;
  const double n = static_cast<double>(coef.size());
  double rss = 0.0;
  double trace = 0.0;
  for (Eigen::Index i = 0; i < coef.size(); ++i) {
    const double s = 1.0 / (1.0 + penalty * eigenvalues_(i));
    trace += s;
    const double r = (1.0 - s) * coef(i);
    rss += r * r;
  }
  const double dof = n - trace;
  if (dof <= 0.0) return std::numeric_limits<double>::infinity();
  return n * rss / (dof * dof);
}

double SplineSmoother::select_penalty(const Eigen::VectorXd& coef) const {
  // Coarse grid in log10(penalty), then golden-section refinement around the
  // best grid point.
  const Eigen::VectorXd curve = basis_ * coef;
  constexpr double lo = -6.0;
  constexpr double hi = 8.0;
  constexpr int steps = 141;
  double best_x = lo;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) {
    const double x = lo + (hi - lo) * i / (steps - 1);
    const double f = gcv(curve, std::pow(10.0, x));
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  const double step = (hi - lo) / (steps - 1);
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = gcv(curve, std::pow(10.0, c));
  double fd = gcv(curve, std::pow(10.0, d));
  for (int it = 0; it < 40; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = gcv(curve, std::pow(10.0, c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = gcv(curve, std::pow(10.0, d));
    }
  }
  const double x = 0.5 * (a + b);
  return gcv(curve, std::pow(10.0, x)) <= best_f ? std::pow(10.0, x) : std::pow(10.0, best_x);
}

YearSmooth SplineSmoother::fit(const Eigen::VectorXd& curve, std::optional<double> penalty) const {
  if (curve.size() != ages_.size()) {
    throw Error(ErrorCode::LengthMismatch, "curve length differs from the age grid");
  }
  if (!curve.allFinite()) throw Error(ErrorCode::NonNumericValue, "curve has non-finite values");
  if (penalty && !(*penalty >= 0.0 && std::isfinite(*penalty))) {
    throw Error(ErrorCode::SingularSystem, "penalty must be finite and non-negative");
  }
  const Eigen::VectorXd coef = basis_.transpose() * curve;
  const double used = penalty ? *penalty : select_penalty(coef);
  YearSmooth out;
  out.penalty = used;
  out.fitted = basis_ * fit_coefficients(coef, used);
  out.residuals = curve - out.fitted;
  return out;
}

YearSmooth smooth_year(const Eigen::VectorXd& curve, const AgeGrid& ages,
                       std::optional<double> penalty) {
  return SplineSmoother(ages).fit(curve, penalty);
}

Eigen::MatrixXd estimate_noise_variance(const Eigen::MatrixXd& residuals, int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidArgument, "noise window must be a positive odd integer");
  }
  const int half = window / 2;
  const Eigen::Index p = residuals.cols();
  Eigen::MatrixXd out(residuals.rows(), p);
  for (Eigen::Index t = 0; t < residuals.rows(); ++t) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const Eigen::Index a = std::max<Eigen::Index>(0, i - half);
      const Eigen::Index b = std::min<Eigen::Index>(p - 1, i + half);
      double sum = 0.0;
      for (Eigen::Index j = a; j <= b; ++j) sum += residuals(t, j) * residuals(t, j);
      out(t, i) = std::max(sum / static_cast<double>(b - a + 1), kNoiseVarianceFloor);
    }
  }
  return out;
}

SmoothSurface smooth_panel(const TransformedPanel& panel, const SmoothingOptions& options) {
  const SplineSmoother smoother(panel.ages);
  SmoothSurface out{panel.years, panel.ages, panel.values,
                    Eigen::MatrixXd(panel.values.rows(), panel.values.cols()), {}};
  Eigen::MatrixXd residuals(panel.values.rows(), panel.values.cols());
  for (Eigen::Index t = 0; t < panel.values.rows(); ++t) {
    try {
      const YearSmooth fit = smoother.fit(panel.values.row(t).transpose(), options.penalty);
      out.smooth.row(t) = fit.fitted.transpose();
      residuals.row(t) = fit.residuals.transpose();
    } catch (const Error& e) {
      throw Error(e.code(), "year " + std::to_string(panel.years[static_cast<std::size_t>(t)]) +
                                ": " + e.what());
    }
  }
  out.noise_var = estimate_noise_variance(residuals, options.noise_window);
  return out;
}

}  // namespace fertcast
