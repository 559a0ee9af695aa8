#include "demux/rates.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "demux/errors.hpp"

namespace demux {
namespace {

void require_probability(double value, std::string_view what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1], got " +
                      std::to_string(value));
  }
}

void require_loss_fraction(double value, std::string_view what) {
  if (!(value >= 0.0 && value < 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1), got " +
                      std::to_string(value));
  }
}

void require_photon_count(int n) {
  if (n < 1) {
    throw DomainError("photon number must be >= 1, got " + std::to_string(n));
  }
}

double inverse_power_of_self(int n) {
  // n^n is exact in a double up to n = 15; 1/n^n is then correctly rounded.
  if (n <= 15) {
    return 1.0 / std::pow(static_cast<double>(n), n);
  }
  return std::pow(1.0 / n, n);
}

double derangements(int n) {
  double previous = 1.0;  // D_0
  double current = 0.0;   // D_1
  if (n == 0) return previous;
  for (int k = 2; k <= n; ++k) {
    const double next = (k - 1) * (current + previous);
    previous = current;
    current = next;
  }
  return current;
}

}  // namespace

void EmitterParams::validate() const {
  if (!(pump_rate_hz > 0.0)) throw DomainError("pump_rate_hz must be > 0");
  if (!(saturation_power_uw > 0.0)) {
    throw DomainError("saturation_power_uw must be > 0");
  }
  require_probability(max_brightness, "max_brightness");
  require_probability(polarized_fraction, "polarized_fraction");
  require_probability(fiber_coupling, "fiber_coupling");
  if (!(g2_zero >= 0.0 && g2_zero < 1.0)) {
    throw DomainError("g2_zero must lie in [0, 1)");
  }
}

double EmitterParams::saturated_brightness() const {
  return max_brightness * polarized_fraction * fiber_coupling;
}

double EmitterParams::brightness_at(double pump_power_uw) const {
  return saturation_brightness(pump_power_uw, saturation_power_uw,
                               saturated_brightness());
}

void LossBudget::validate() const {
  if (!(mode_overlap >= 0.0 && mode_overlap <= 1.0)) {
    throw DomainError("mode_overlap must lie in [0, 1]");
  }
  require_loss_fraction(fresnel_in, "fresnel_in");
  require_loss_fraction(fresnel_out, "fresnel_out");
  if (!(propagation_db_per_cm >= 0.0)) {
    throw DomainError("propagation_db_per_cm must be >= 0");
  }
  if (!(device_length_cm >= 0.0)) {
    throw DomainError("device_length_cm must be >= 0");
  }
  if (measured_transmission) {
    require_probability(*measured_transmission, "measured_transmission");
  }
}

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::active ? "active" : "probabilistic";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "active") return Scheme::active;
  if (name == "probabilistic") return Scheme::probabilistic;
  throw DomainError("unknown scheme '" + std::string(name) + "'");
}

double s_active(int n, double eta_dm) {
  require_photon_count(n);
  require_probability(eta_dm, "eta_dm");
  if (n == 1) return 1.0;
  const double misroute = (1.0 - eta_dm) / (n - 1);
  return (std::pow(eta_dm, n) + (n - 1) * std::pow(misroute, n)) / n;
}

double s_probabilistic(int n) {
  require_photon_count(n);
  return inverse_power_of_self(n);
}

double s_uniform_misroute(int n, double eta_dm) {
  require_photon_count(n);
  require_probability(eta_dm, "eta_dm");
  if (n == 1) return 1.0;
  const double misroute = (1.0 - eta_dm) / (n - 1);
  return (std::pow(eta_dm, n) + derangements(n) * std::pow(misroute, n)) / n;
}

ScalingResult scaling(int n, double eta_dm) {
  return {n, s_active(n, eta_dm), s_probabilistic(n), eta_dm};
}

double n_fold_rate(int n, double pump_rate_hz, double eta_sd, double eta_det,
                   double s_dm) {
  require_photon_count(n);
  if (!(pump_rate_hz >= 0.0)) throw DomainError("pump rate must be >= 0");
  require_probability(eta_sd, "eta_sd");
  require_probability(eta_det, "eta_det");
  require_probability(s_dm, "S_DM");
  return pump_rate_hz * std::pow(eta_sd * eta_det, n) * s_dm;
}

double compose_transmission(const LossBudget& budget) {
  budget.validate();
  const double fresnel = (1.0 - budget.fresnel_in) * (1.0 - budget.fresnel_out);
  if (budget.measured_transmission) {
    const double t = *budget.measured_transmission;
    return budget.fresnel_removed ? std::min(1.0, t / fresnel) : t;
  }
  const double propagation = std::pow(
      10.0, -budget.propagation_db_per_cm * budget.device_length_cm / 10.0);
  const double facets = budget.fresnel_removed ? 1.0 : fresnel;
  return budget.mode_overlap * facets * propagation;
}

double saturation_brightness(double p_uw, double p0_uw, double max_value) {
  if (!(p0_uw > 0.0)) throw DomainError("saturation power must be > 0");
  if (!(p_uw >= 0.0)) throw DomainError("pump power must be >= 0");
  return max_value * -std::expm1(-p_uw / p0_uw);
}

double SchemeModel::scaling(int n) const {
  return scheme == Scheme::active ? s_active(n, eta_dm) : s_probabilistic(n);
}

double SchemeModel::rate(int n) const {
  return n_fold_rate(n, pump_rate_hz, eta_sd, include_detectors ? eta_det : 1.0,
                     scaling(n));
}

RatePrediction SchemeModel::predict(int n) const {
  return {n, scheme, rate(n), eta_sd, eta_det, include_detectors};
}

SchemeModel active_scheme(const PredictionSetup& setup) {
  setup.source.validate();
  require_probability(setup.eta_dm, "eta_dm");
  require_probability(setup.eta_det, "eta_det");
  const double t = compose_transmission(setup.budget);
  return {Scheme::active,
          setup.source.pump_rate_hz,
          setup.source.saturated_brightness() * t,
          setup.eta_det,
          setup.eta_dm,
          setup.include_detectors};
}

SchemeModel probabilistic_scheme(const PredictionSetup& setup) {
  setup.source.validate();
  require_probability(setup.eta_det, "eta_det");
  return {Scheme::probabilistic,
          setup.source.pump_rate_hz,
          setup.source.saturated_brightness(),
          setup.eta_det,
          1.0,
          setup.include_detectors};
}

std::vector<RatePrediction> predict_rates(const PredictionSetup& setup,
                                          int n_max) {
  if (n_max < 0) throw DomainError("n_max must be >= 0");
  const SchemeModel active = active_scheme(setup);
  const SchemeModel passive = probabilistic_scheme(setup);
  std::vector<RatePrediction> rows;
  rows.reserve(2 * static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) rows.push_back(active.predict(n));
  for (int n = 1; n <= n_max; ++n) rows.push_back(passive.predict(n));
  return rows;
}

std::optional<int> crossover_n(const SchemeModel& active,
                               const SchemeModel& probabilistic, int n_max) {
  if (n_max < 2) throw DomainError("crossover search needs n_max >= 2");
  for (int n = 1; n <= n_max; ++n) {
    if (active.rate(n) > probabilistic.rate(n)) return n;
  }
  return std::nullopt;
}

}  // namespace demux
