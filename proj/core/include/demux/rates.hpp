#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace demux {

/// Pulsed single-photon emitter.
///
/// Brightness figures are per-pulse probabilities of a photon reaching the
/// demultiplexer input. `max_brightness` is the saturated value before
/// polarization filtering and fiber coupling are applied.
struct EmitterParams {
  double pump_rate_hz = 80.0e6;
  double saturation_power_uw = 348.0;
  double max_brightness = 0.0;
  double g2_zero = 0.0;
  double polarized_fraction = 1.0;
  double fiber_coupling = 1.0;

  void validate() const;

  /// Brightness at saturation after polarization and fiber losses.
  [[nodiscard]] double saturated_brightness() const;

  /// Brightness at a finite pump power, following the saturation law.
  [[nodiscard]] double brightness_at(double pump_power_uw) const;
};

/// Insertion-loss decomposition of the demultiplexer chip.
///
/// When `measured_transmission` is set it replaces the composed value.
/// `fresnel_removed` models anti-reflection coated facets: the Fresnel factors
/// are dropped from a composed budget, or divided out of a measured one.
struct LossBudget {
  double mode_overlap = 1.0;
  double fresnel_in = 0.0;
  double fresnel_out = 0.0;
  double propagation_db_per_cm = 0.0;
  double device_length_cm = 0.0;
  std::optional<double> measured_transmission;
  bool fresnel_removed = false;

  void validate() const;
};

enum class Scheme { active, probabilistic };

[[nodiscard]] std::string_view to_string(Scheme scheme);
[[nodiscard]] Scheme scheme_from_string(std::string_view name);

struct ScalingResult {
  int n = 0;
  double s_active = 0.0;
  double s_probabilistic = 0.0;
  double eta_dm = 0.0;
};

struct RatePrediction {
  int n = 0;
  Scheme scheme = Scheme::active;
  double rate_hz = 0.0;
  double eta_sd = 0.0;
  double eta_det = 1.0;
  bool include_detectors = false;
};

/// Demultiplexing factor of an actively switched network with switching
/// efficiency `eta_dm`, misrouted photons spread uniformly over the other
/// n-1 channels. n = 1 returns the continuous limit 1.
[[nodiscard]] double s_active(int n, double eta_dm);

/// Demultiplexing factor of a passive 1xn beam-splitter network: (1/n)^n.
[[nodiscard]] double s_probabilistic(int n);

/// Same misrouting model as s_active, but counting every derangement of the
/// n photons instead of n-1 of them. Agrees with s_active for n <= 3.
[[nodiscard]] double s_uniform_misroute(int n, double eta_dm);

[[nodiscard]] ScalingResult scaling(int n, double eta_dm);

/// n-fold rate R (eta_sd eta_det)^n S.
[[nodiscard]] double n_fold_rate(int n, double pump_rate_hz, double eta_sd,
                                 double eta_det, double s_dm);

[[nodiscard]] double compose_transmission(const LossBudget& budget);

/// max_value (1 - exp(-P/P0)).
[[nodiscard]] double saturation_brightness(double p_uw, double p0_uw,
                                           double max_value);

/// Closed-form rate model of one demultiplexing scheme.
struct SchemeModel {
  Scheme scheme = Scheme::active;
  double pump_rate_hz = 0.0;
  double eta_sd = 0.0;
  double eta_det = 1.0;
  double eta_dm = 1.0;
  bool include_detectors = false;

  [[nodiscard]] double scaling(int n) const;
  [[nodiscard]] double rate(int n) const;
  [[nodiscard]] RatePrediction predict(int n) const;
};

struct PredictionSetup {
  EmitterParams source;
  LossBudget budget;
  double eta_dm = 1.0;
  double eta_det = 1.0;
  bool include_detectors = false;
};

/// eta_SD = saturated brightness x chip transmission.
[[nodiscard]] SchemeModel active_scheme(const PredictionSetup& setup);

/// Lossless passive splitter tree fed by the same source.
[[nodiscard]] SchemeModel probabilistic_scheme(const PredictionSetup& setup);

/// Rates for n = 1..n_max, active rows first. n_max = 0 gives no rows.
[[nodiscard]] std::vector<RatePrediction> predict_rates(
    const PredictionSetup& setup, int n_max);

/// Smallest n in [1, n_max] where the active rate strictly exceeds the
/// probabilistic one.
[[nodiscard]] std::optional<int> crossover_n(const SchemeModel& active,
                                             const SchemeModel& probabilistic,
                                             int n_max);

}  // namespace demux
