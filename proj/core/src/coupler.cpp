#include "demux/coupler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "demux/errors.hpp"

namespace demux {
namespace {

void require_geometry(double kappa_per_mm, double length_mm) {
  if (!(kappa_per_mm > 0.0)) throw DomainError("coupling strength must be > 0");
  if (!(length_mm > 0.0)) throw DomainError("coupler length must be > 0");
}

}  // namespace

double cross_fraction(double kappa_per_mm, double length_mm,
                      double delta_beta_per_mm) {
  require_geometry(kappa_per_mm, length_mm);
  const double half_mismatch = 0.5 * delta_beta_per_mm;
  const double g2 = kappa_per_mm * kappa_per_mm + half_mismatch * half_mismatch;
  const double s = std::sin(std::sqrt(g2) * length_mm);
  const double value = kappa_per_mm * kappa_per_mm / g2 * s * s;
  return std::clamp(value, 0.0, 1.0);
}

double coupling_length_mm(double kappa_per_mm) {
  if (!(kappa_per_mm > 0.0)) throw DomainError("coupling strength must be > 0");
  return std::numbers::pi / (2.0 * kappa_per_mm);
}

double delta_beta_for_cross_fraction(double kappa_per_mm, double length_mm,
                                     double target) {
  require_geometry(kappa_per_mm, length_mm);
  if (!(target >= 0.0 && target <= 1.0)) {
    throw DomainError("target cross fraction must lie in [0, 1]");
  }
  const auto f = [&](double db) {
    return cross_fraction(kappa_per_mm, length_mm, db) - target;
  };
  if (f(0.0) == 0.0) return 0.0;

  // Step out in mismatch until the sign changes; the cross fraction is
  // continuous and tends to zero for large mismatch.
  const double step = kappa_per_mm / 64.0;
  const double limit = 1.0e4 * kappa_per_mm;
  double lo = 0.0;
  double f_lo = f(lo);
  double hi = step;
  double f_hi = f(hi);
  while ((f_lo > 0.0) == (f_hi > 0.0) && f_hi != 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi += step;
    if (hi > limit) {
      throw DomainError("cross fraction " + std::to_string(target) +
                        " is not reachable for this coupler");
    }
    f_hi = f(hi);
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void CouplerParams::validate() const {
  require_geometry(coupling_strength_per_mm, length_mm);
  if (state_voltages.empty()) {
    throw ConfigError("coupler needs at least one state voltage");
  }
}

double CouplerParams::splitting_ratio(std::string_view state) const {
  const auto it = state_voltages.find(std::string(state));
  if (it == state_voltages.end()) {
    throw ConfigError("no voltage defined for coupler state '" +
                      std::string(state) + "'");
  }
  return cross_fraction(coupling_strength_per_mm, length_mm,
                        delta_beta_per_volt * it->second);
}

void CouplerTable::set(const CouplerId& id, const std::string& state,
                       StateRatio value) {
  if (!(value.ratio >= 0.0 && value.ratio <= 1.0)) {
    throw DomainError("splitting ratio of " + id + "/" + state +
                      " must lie in [0, 1]");
  }
  if (!(value.sigma >= 0.0)) {
    throw DomainError("ratio uncertainty of " + id + "/" + state +
                      " must be >= 0");
  }
  entries_[id][state] = value;
}

void CouplerTable::set_from_params(const CouplerId& id,
                                   const CouplerParams& params) {
  params.validate();
  for (const auto& [state, volts] : params.state_voltages) {
    (void)volts;
    set(id, state, {params.splitting_ratio(state), 0.0});
  }
}

bool CouplerTable::contains(const CouplerId& id) const {
  return entries_.contains(id);
}

bool CouplerTable::contains(const CouplerId& id, std::string_view state) const {
  const auto it = entries_.find(id);
  return it != entries_.end() && it->second.find(state) != it->second.end();
}

const StateRatio& CouplerTable::at(const CouplerId& id,
                                   std::string_view state) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw ConfigError("no splitting ratios defined for coupler '" + id + "'");
  }
  const auto st = it->second.find(state);
  if (st == it->second.end()) {
    throw ConfigError("coupler '" + id + "' has no state '" +
                      std::string(state) + "'");
  }
  return st->second;
}

}  // namespace demux
