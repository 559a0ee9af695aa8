#include "least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace demux::detail {
namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Inverse of the normal matrix, or empty when it is numerically singular.
// The check runs on the unit-diagonal scaled matrix so parameter units do not
// matter.
Eigen::MatrixXd normal_inverse(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(a(i, i) > 0.0) || !std::isfinite(a(i, i))) return {};
    scale(i) = 1.0 / std::sqrt(a(i, i));
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * a * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  if (eig.info() != Eigen::Success) return {};
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 1e-12 * hi)) return {};
  const Eigen::MatrixXd inv_scaled =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();
  return scale.asDiagonal() * inv_scaled * scale.asDiagonal();
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residual,
    const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  Eigen::VectorXd r0;
  residual(x, r0);
  Eigen::MatrixXd jac(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  Eigen::VectorXd rp;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = 1e-7 * std::max(1.0, std::abs(x(i)));
    if (x(i) + h > upper(i)) h = -h;
    if (x(i) + h < lower(i)) h = 0.5 * (upper(i) - lower(i));
    xp(i) = x(i) + h;
    residual(xp, rp);
    jac.col(i) = (rp - r0) / h;
    xp(i) = x(i);
  }
  return jac;
}

LsqOutcome solve_damped_least_squares(const LsqProblem& problem, Eigen::VectorXd x0,
                                      const LsqSettings& settings) {
  LsqOutcome out;
  Eigen::VectorXd x = project(x0, problem.lower, problem.upper);
  Eigen::VectorXd r;
  problem.residual(x, r);
  double chi = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::MatrixXd jac;
  const auto n = x.size();

  for (int it = 1; it <= settings.max_iterations; ++it) {
    out.iterations = it;
    if (chi == 0.0) {
      out.converged = true;
      break;
    }
    problem.jacobian(x, jac);
    Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * r;  // gradient of chi^2 / 2

    // Parameters pinned at a bound with the gradient pushing outward stay put.
    std::vector<bool> frozen(n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = x(i) <= problem.lower(i) && g(i) > 0.0;
      const bool at_hi = x(i) >= problem.upper(i) && g(i) < 0.0;
      frozen[i] = at_lo || at_hi;
    }

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      Eigen::VectorXd rhs = -g;
      for (Eigen::Index i = 0; i < n; ++i) {
        damped(i, i) += lambda * std::max(a(i, i), 1e-300);
        if (frozen[i]) {
          damped.row(i).setZero();
          damped.col(i).setZero();
          damped(i, i) = 1.0;
          rhs(i) = 0.0;
        }
      }
      const Eigen::VectorXd step = damped.ldlt().solve(rhs);
      const Eigen::VectorXd trial = project(x + step, problem.lower, problem.upper);
      Eigen::VectorXd r_trial;
      problem.residual(trial, r_trial);
      const double chi_trial = r_trial.squaredNorm();
      if (std::isfinite(chi_trial) && chi_trial <= chi) {
        const double moved = (trial - x).norm();
        x = trial;
        r = std::move(r_trial);
        chi = chi_trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        const double tol = settings.relative_step_tolerance;
        if (moved <= tol * (x.norm() + tol)) out.converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No downhill step at any damping: a minimum to working precision.
          stalled = true;
          break;
        }
      }
    }
    if (stalled) {
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }

  out.x = x;
  out.chi_squared = chi;
  out.at_bound.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.at_bound[i] = x(i) <= problem.lower(i) || x(i) >= problem.upper(i);
  }
  problem.jacobian(x, jac);
  out.covariance = normal_inverse(jac.transpose() * jac);
  out.singular = out.covariance.size() == 0;
  return out;
}

}  // namespace demux::detail
