#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "demux/coupler.hpp"
#include "demux/histogram.hpp"
#include "demux/network.hpp"
#include "demux/schedule.hpp"

namespace demux {

struct RatioEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Per-coupler, per-state splitting ratios recovered from coincidence
/// histograms, with their joint covariance.
struct SplittingEstimate {
  std::vector<std::pair<CouplerId, std::string>> parameters;
  std::vector<RatioEstimate> ratios;            // parallel to `parameters`
  std::vector<std::vector<double>> covariance;  // over `parameters`
  double scale = 0.0;  // coincidences per delay bin for unit routing products
  double chi_squared = 0.0;
  int degrees_of_freedom = 0;
  int iterations = 0;

  [[nodiscard]] const RatioEstimate& at(const CouplerId& id, std::string_view state) const;
  [[nodiscard]] CouplerTable as_table() const;
};

/// Inverts the bin-indexed routing model. For a pair (a, b) and delay d != 0
/// the expected count is scale * sum_phase M[phase][a] M[phase + d][b], with M
/// the path-product routing of each schedule bin. Counts are summed over
/// delays of equal residue modulo the period and fitted by Poisson-weighted
/// least squares; the zero-delay bin is left out.
///
/// Needs the pairs (1, b) for every other channel b. Throws EstimationError
/// naming missing pairs, on empty histograms, or when the design is singular.
[[nodiscard]] SplittingEstimate estimate_splitting_ratios(
    std::span<const CoincidenceHistogram> histograms, const DemuxNetwork& network,
    const SwitchSchedule& schedule);

/// Switching efficiency of the estimated couplers with first-order error
/// propagation through the covariance.
[[nodiscard]] RatioEstimate switching_efficiency_estimate(
    const DemuxNetwork& network, const SwitchSchedule& schedule,
    const SplittingEstimate& estimate);

}  // namespace demux
