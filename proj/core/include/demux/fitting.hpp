#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "demux/nfold.hpp"

namespace demux {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> sigmas;  // one-sigma; empty unless converged
  double chi_squared = 0.0;
  int degrees_of_freedom = 0;
  bool converged = false;
  bool at_boundary = false;
  int iterations = 0;
  std::string diagnostics;

  [[nodiscard]] double value(std::string_view name) const;
  [[nodiscard]] double sigma(std::string_view name) const;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_step_tolerance = 1e-10;
  std::optional<std::vector<double>> start;
};

struct SaturationPoint {
  double power_uw = 0.0;
  double rate_hz = 0.0;
  double sigma_hz = 0.0;
};

/// Two-photon coincidence rate c_max (1 - exp(-P/P0))^2.
[[nodiscard]] double saturation_coincidence_rate(double power_uw, double c_max_hz,
                                                 double p0_uw);

/// Weighted fit of (c_max_hz, p0_uw). Throws NumericalError when the fit
/// does not converge or the data cannot determine both parameters.
[[nodiscard]] FitResult fit_saturation(std::span<const SaturationPoint> data,
                                       const FitOptions& options = {});

/// Expected n-fold rate for one switching cycle of `cycle_period` pulses:
/// (R / period) (eta_sd eta_det)^n n S_active(n, eta_dm). With period = n
/// this is R (eta_sd eta_det)^n S_active(n, eta_dm).
[[nodiscard]] double switched_nfold_rate(int n, std::size_t cycle_period,
                                         double pump_rate_hz, double eta_sd,
                                         double eta_det, double eta_dm);

/// One-parameter weighted fit of eta_dm in [0, 1] to measured n-fold rates.
/// Needs the n = 2 and n = 3 rates. Solutions on the interval ends are
/// flagged `at_boundary`; when no coincidences were seen at all the result is
/// eta_dm = 0, flagged and not converged. A solution below 1/2 is replaced by
/// the best one in [1/2, 1] unless the data prefer it by more than 4 in chi^2.
[[nodiscard]] FitResult fit_switching_efficiency(std::span<const NFoldCounts> rates,
                                                 double pump_rate_hz, double eta_det,
                                                 double eta_sd,
                                                 const FitOptions& options = {});

}  // namespace demux
