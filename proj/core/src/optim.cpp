#include "fertcast/optim.hpp"

#include <cmath>
#include <limits>

namespace fertcast {

namespace {

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double fx) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double up = safe_eval(f, probe);
    probe(i) = x(i) - h;
    const double down = safe_eval(f, probe);
    probe(i) = x(i);
    if (std::isfinite(up) && std::isfinite(down)) {
      g(i) = (up - down) / (2.0 * h);
    } else if (std::isfinite(up)) {
      g(i) = (up - fx) / h;
    } else if (std::isfinite(down)) {
      g(i) = (fx - down) / h;
    } else {
      g(i) = 0.0;
    }
  }
  return g;
}

}  // namespace

MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& objective,
                             Eigen::VectorXd x0, const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  MinimizeResult result;
  result.x = std::move(x0);
  result.value = safe_eval(objective, result.x);
  if (n == 0 || !std::isfinite(result.value)) {
    result.converged = n == 0 && std::isfinite(result.value);
    return result;
  }

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd grad = numeric_gradient(objective, result.x, result.value);

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_hessian * grad;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // not a descent direction: restart from steepest descent
      inv_hessian.setIdentity();
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = result.x + step * dir;
      f_new = safe_eval(objective, x_new);
      if (f_new <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No progress along this direction; we are at a (numerical) optimum
      // unless the curvature model is bad, in which case one steepest-descent
      // retry is worthwhile.
      if (!inv_hessian.isIdentity()) {
        inv_hessian.setIdentity();
        continue;
      }
      result.converged = true;
      break;
    }

    const Eigen::VectorXd g_new = numeric_gradient(objective, x_new, f_new);
    const Eigen::VectorXd s = x_new - result.x;
    const Eigen::VectorXd y = g_new - grad;
    const double improvement = result.value - f_new;
    result.x = x_new;
    result.value = f_new;
    grad = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      inv_hessian = (eye - rho * s * y.transpose()) * inv_hessian * (eye - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }
    if (improvement < options.value_tolerance * (std::abs(result.value) + options.value_tolerance)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace fertcast
