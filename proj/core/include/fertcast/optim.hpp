#pragma once

#include <Eigen/Dense>

#include <functional>

namespace fertcast {

struct MinimizeOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;
  double value_tolerance = 1e-10;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton (BFGS) minimization with central-difference gradients and a
/// backtracking Armijo line search. Non-finite objective values are treated as
/// +infinity so the line search backs away from them.
MinimizeResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& objective,
                             Eigen::VectorXd x0, const MinimizeOptions& options = {});

}  // namespace fertcast
