#pragma once

#include <map>
#include <string>
#include <string_view>

namespace demux {

using CouplerId = std::string;

/// Power fraction transferred to the cross port of a two-mode codirectional
/// coupler with coupling strength `kappa_per_mm`, interaction length
/// `length_mm` and propagation-constant mismatch `delta_beta_per_mm`.
[[nodiscard]] double cross_fraction(double kappa_per_mm, double length_mm,
                                    double delta_beta_per_mm);

/// Length for complete power transfer at zero mismatch, pi / (2 kappa).
[[nodiscard]] double coupling_length_mm(double kappa_per_mm);

/// Smallest non-negative mismatch that sets the cross fraction to `target`.
/// Throws DomainError when the target is not reachable from zero mismatch.
[[nodiscard]] double delta_beta_for_cross_fraction(double kappa_per_mm,
                                                   double length_mm,
                                                   double target);

/// Physical description of one electro-optic directional coupler.
struct CouplerParams {
  double coupling_strength_per_mm = 0.0;
  double length_mm = 0.0;
  double delta_beta_per_volt = 0.0;  // 1/mm per volt, linear electro-optic response
  std::map<std::string, double> state_voltages;

  void validate() const;
  [[nodiscard]] double splitting_ratio(std::string_view state) const;
};

/// Splitting ratio of one coupler in one switch state: probability of taking
/// the coupler's first (cross) branch.
struct CouplerState {
  CouplerId coupler_id;
  double splitting_ratio = 0.0;
};

struct StateRatio {
  double ratio = 0.0;
  double sigma = 0.0;
};

/// Per-coupler, per-state splitting ratios with optional uncertainties.
class CouplerTable {
 public:
  void set(const CouplerId& id, const std::string& state, StateRatio value);
  void set_from_params(const CouplerId& id, const CouplerParams& params);

  [[nodiscard]] bool contains(const CouplerId& id) const;
  [[nodiscard]] bool contains(const CouplerId& id, std::string_view state) const;
  [[nodiscard]] const StateRatio& at(const CouplerId& id,
                                     std::string_view state) const;
  [[nodiscard]] double ratio(const CouplerId& id, std::string_view state) const {
    return at(id, state).ratio;
  }
  [[nodiscard]] const std::map<CouplerId, std::map<std::string, StateRatio, std::less<>>>&
  entries() const {
    return entries_;
  }

 private:
  std::map<CouplerId, std::map<std::string, StateRatio, std::less<>>> entries_;
};

}  // namespace demux
