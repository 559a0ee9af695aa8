#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace demux::detail {

/// Weighted residuals r_i = (y_i - f_i(x)) / sigma_i and their Jacobian
/// d r / d x.
struct LsqProblem {
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residual;
  std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LsqSettings {
  int max_iterations = 200;
  double relative_step_tolerance = 1e-10;
};

struct LsqOutcome {
  Eigen::VectorXd x;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 at the optimum, empty if singular
  double chi_squared = 0.0;
  int iterations = 0;
  bool converged = false;
  bool singular = false;
  std::vector<bool> at_bound;
};

/// Levenberg-Marquardt with box constraints handled by projection.
LsqOutcome solve_damped_least_squares(const LsqProblem& problem, Eigen::VectorXd x0,
                                      const LsqSettings& settings);

/// Forward/backward differences that respect the box.
Eigen::MatrixXd numeric_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residual,
    const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

}  // namespace demux::detail
