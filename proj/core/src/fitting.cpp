#include "demux/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "demux/errors.hpp"
#include "demux/rates.hpp"
#include "least_squares.hpp"

namespace demux {
namespace {

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw DomainError("fit has no parameter '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - names.begin());
}

// Saturation factor above which exp(-P/P0) no longer changes the model.
constexpr double kSaturatedExponent = 36.0;

}  // namespace

double FitResult::value(std::string_view name) const {
  return values.at(index_of(names, name));
}

double FitResult::sigma(std::string_view name) const {
  if (sigmas.empty()) throw NumericalError("fit reported no uncertainties");
  return sigmas.at(index_of(names, name));
}

double saturation_coincidence_rate(double power_uw, double c_max_hz, double p0_uw) {
  const double s = saturation_brightness(power_uw, p0_uw, 1.0);
  return c_max_hz * s * s;
}

FitResult fit_saturation(std::span<const SaturationPoint> data, const FitOptions& options) {
  std::set<double> powers;
  for (const auto& p : data) {
    if (!(p.power_uw >= 0.0)) throw DomainError("pump powers must be >= 0");
    if (!(p.sigma_hz > 0.0)) throw DomainError("rate uncertainties must be > 0");
    if (!std::isfinite(p.rate_hz)) throw DomainError("rates must be finite");
    powers.insert(p.power_uw);
  }
  if (powers.size() < 3) {
    throw DomainError("saturation fit needs at least 3 distinct pump powers, got " +
                      std::to_string(powers.size()));
  }
  const double max_power = *powers.rbegin();

  detail::LsqProblem problem;
  problem.residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r.resize(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& p = data[i];
      r(i) = (p.rate_hz - saturation_coincidence_rate(p.power_uw, x(0), x(1))) / p.sigma_hz;
    }
  };
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
    j.resize(static_cast<Eigen::Index>(data.size()), 2);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& p = data[i];
      const double e = std::exp(-p.power_uw / x(1));
      const double s = -std::expm1(-p.power_uw / x(1));
      j(i, 0) = -s * s / p.sigma_hz;
      j(i, 1) = x(0) * 2.0 * s * e * (p.power_uw / (x(1) * x(1))) / p.sigma_hz;
    }
  };
  problem.lower = Eigen::Vector2d(0.0, 1e-9 * std::max(max_power, 1.0));
  problem.upper = Eigen::Vector2d(std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity());

  Eigen::Vector2d start;
  if (options.start) {
    if (options.start->size() != 2) throw DomainError("saturation fit takes 2 start values");
    start = Eigen::Vector2d((*options.start)[0], (*options.start)[1]);
  } else {
    double max_rate = 0.0;
    for (const auto& p : data) max_rate = std::max(max_rate, p.rate_hz);
    const std::vector<double> sorted(powers.begin(), powers.end());
    start = Eigen::Vector2d(std::max(max_rate, 1e-12), std::max(sorted[sorted.size() / 2], 1e-9));
  }

  const auto outcome = detail::solve_damped_least_squares(
      problem, start, {options.max_iterations, options.relative_step_tolerance});

  FitResult fit;
  fit.names = {"c_max_hz", "p0_uw"};
  fit.values = {outcome.x(0), outcome.x(1)};
  fit.chi_squared = outcome.chi_squared;
  fit.degrees_of_freedom = static_cast<int>(data.size()) - 2;
  fit.iterations = outcome.iterations;
  fit.converged = outcome.converged;
  fit.at_boundary = outcome.at_bound[0] || outcome.at_bound[1];

  const double min_positive_power = [&] {
    for (const double p : powers) {
      if (p > 0.0) return p;
    }
    return 0.0;
  }();
  const bool saturated = min_positive_power / outcome.x(1) > kSaturatedExponent;

  if (!outcome.converged || outcome.singular || saturated || fit.at_boundary) {
    std::ostringstream why;
    why << "saturation fit failed after " << outcome.iterations << " iterations: ";
    if (!outcome.converged) {
      why << "no convergence";
    } else if (saturated || outcome.singular) {
      why << "P0 not determined (every point is saturated, data show no power dependence)";
    } else {
      why << "parameter on its bound";
    }
    why << "; last c_max=" << outcome.x(0) << " Hz, P0=" << outcome.x(1)
        << " uW, chi2=" << outcome.chi_squared;
    throw NumericalError(why.str());
  }
  fit.sigmas = {std::sqrt(outcome.covariance(0, 0)), std::sqrt(outcome.covariance(1, 1))};
  return fit;
}

double switched_nfold_rate(int n, std::size_t cycle_period, double pump_rate_hz,
                           double eta_sd, double eta_det, double eta_dm) {
  const double period = cycle_period == 0 ? static_cast<double>(n)
                                          : static_cast<double>(cycle_period);
  return pump_rate_hz / period * std::pow(eta_sd * eta_det, n) * n * s_active(n, eta_dm);
}

namespace {

double d_s_active(int n, double eta) {
  if (n == 1) return 0.0;
  const double q = (1.0 - eta) / (n - 1);
  return std::pow(eta, n - 1) - std::pow(q, n - 1);
}

}  // namespace

FitResult fit_switching_efficiency(std::span<const NFoldCounts> rates, double pump_rate_hz,
                                   double eta_det, double eta_sd, const FitOptions& options) {
  if (!(pump_rate_hz > 0.0)) throw DomainError("pump rate must be > 0");
  if (!(eta_det >= 0.0 && eta_det <= 1.0)) throw DomainError("eta_det must lie in [0, 1]");
  if (!(eta_sd >= 0.0 && eta_sd <= 1.0)) throw DomainError("eta_sd must lie in [0, 1]");
  bool has2 = false;
  bool has3 = false;
  for (const auto& r : rates) {
    if (r.n < 1) throw DomainError("n-fold order must be >= 1");
    if (!(r.acquisition_s > 0.0)) throw DomainError("n-fold counts need an acquisition time");
    if (!(r.rate_hz >= 0.0)) throw DomainError("n-fold rates must be >= 0");
    has2 |= r.n == 2;
    has3 |= r.n == 3;
  }
  if (!has2 || !has3) {
    throw DomainError("switching-efficiency fit needs the 2-fold and 3-fold rates");
  }

  FitResult fit;
  fit.names = {"eta_dm"};
  fit.degrees_of_freedom = static_cast<int>(rates.size()) - 1;

  const bool nothing_seen = std::all_of(rates.begin(), rates.end(), [](const auto& r) {
    return r.n >= 2 && r.rate_hz == 0.0;
  });
  if (nothing_seen) {
    fit.values = {0.0};
    fit.at_boundary = true;
    fit.diagnostics = "no multi-photon coincidences recorded; eta_dm pinned at 0";
    return fit;
  }

  // An empty bin still carries one count of uncertainty.
  std::vector<double> sigma(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    sigma[i] = rates[i].rate_sigma_hz > 0.0 ? rates[i].rate_sigma_hz
                                            : 1.0 / rates[i].acquisition_s;
  }
  const auto model = [&](std::size_t i, double eta) {
    const auto& r = rates[i];
    return switched_nfold_rate(r.n, r.cycle_period, pump_rate_hz, eta_sd, eta_det, eta);
  };

  detail::LsqProblem problem;
  problem.residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& res) {
    res.resize(static_cast<Eigen::Index>(rates.size()));
    for (std::size_t i = 0; i < rates.size(); ++i) {
      res(i) = (rates[i].rate_hz - model(i, x(0))) / sigma[i];
    }
  };
  problem.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
    j.resize(static_cast<Eigen::Index>(rates.size()), 1);
    for (std::size_t i = 0; i < rates.size(); ++i) {
      const auto& r = rates[i];
      const double period = r.cycle_period == 0 ? r.n : static_cast<double>(r.cycle_period);
      const double scale = pump_rate_hz / period * std::pow(eta_sd * eta_det, r.n) * r.n;
      j(i, 0) = -scale * d_s_active(r.n, x(0)) / sigma[i];
    }
  };
  problem.lower = Eigen::VectorXd::Constant(1, 0.0);
  problem.upper = Eigen::VectorXd::Constant(1, 1.0);

  // S_active is not monotone below 1/2, so seed the local solver from the
  // best point of a coarse scan (ties go to the larger efficiency).
  const detail::LsqSettings lsq{options.max_iterations, options.relative_step_tolerance};
  double start = 1.0;
  double upper_start = 1.0;
  const bool scanned = !(options.start && !options.start->empty());
  if (!scanned) {
    start = std::clamp((*options.start)[0], 0.0, 1.0);
  } else {
    double best = std::numeric_limits<double>::infinity();
    double best_upper = best;
    Eigen::VectorXd x(1);
    Eigen::VectorXd res;
    for (int k = 1000; k >= 0; --k) {
      x(0) = k / 1000.0;
      problem.residual(x, res);
      const double chi = res.squaredNorm();
      if (chi < best) {
        best = chi;
        start = x(0);
      }
      if (k >= 500 && chi < best_upper) {
        best_upper = chi;
        upper_start = x(0);
      }
    }
  }

  auto outcome = detail::solve_damped_least_squares(
      problem, Eigen::VectorXd::Constant(1, start), lsq);

  // At n = 2 the model cannot tell eta from 1 - eta and higher orders break
  // the tie only weakly. Keep the efficient branch unless the data reject it
  // at two sigma.
  std::string branch_note;
  if (scanned && outcome.converged && outcome.x(0) < 0.5) {
    const auto upper = detail::solve_damped_least_squares(
        problem, Eigen::VectorXd::Constant(1, upper_start), lsq);
    if (upper.converged && upper.x(0) >= 0.5 &&
        upper.chi_squared - outcome.chi_squared <= 4.0) {
      branch_note = "mirror solution eta_dm=" + std::to_string(outcome.x(0)) +
                    " fits equally well; kept eta_dm >= 0.5";
      outcome = upper;
    }
  }

  fit.values = {outcome.x(0)};
  fit.chi_squared = outcome.chi_squared;
  fit.iterations = outcome.iterations;
  fit.converged = outcome.converged;
  fit.at_boundary = outcome.x(0) <= 1e-9 || outcome.x(0) >= 1.0 - 1e-9;
  if (fit.at_boundary) {
    fit.diagnostics = "eta_dm on the boundary of [0, 1]; rates are not consistent with any interior value";
  }
  if (!outcome.converged) {
    fit.diagnostics = "no convergence after " + std::to_string(outcome.iterations) + " iterations";
    return fit;
  }
  if (!branch_note.empty()) fit.diagnostics = branch_note;
  if (!outcome.singular) {
    fit.sigmas = {std::sqrt(outcome.covariance(0, 0))};
  } else {
    fit.sigmas = {std::numeric_limits<double>::infinity()};
    fit.diagnostics += fit.diagnostics.empty() ? "" : "; ";
    fit.diagnostics += "rates carry no information on eta_dm at the optimum";
  }
  return fit;
}

}  // namespace demux
