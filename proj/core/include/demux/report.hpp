#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "demux/fitting.hpp"
#include "demux/histogram.hpp"
#include "demux/nfold.hpp"
#include "demux/rates.hpp"
#include "demux/splitting.hpp"

namespace demux {

// CSV writers. All write a header line; numbers use full double precision.

/// delay_bins,delay_ns,count,sigma
void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& h);

/// n,channels,window_ns,count,acquisition_s,rate_hz,rate_sigma_hz
void write_nfold_csv(std::ostream& out, std::span<const NFoldCounts> rows);

/// n,scheme,rate_hz
void write_predictions_csv(std::ostream& out, std::span<const RatePrediction> rows);

/// power_uw,rate_hz,sigma_hz
void write_saturation_csv(std::ostream& out, std::span<const SaturationPoint> data);

/// Reads power_uw,rate_hz,sigma_hz rows. Blank lines and lines starting with
/// '#' are skipped, as is a header. Throws DataError on malformed rows.
[[nodiscard]] std::vector<SaturationPoint> read_saturation_csv(std::istream& in);

/// power_uw,model_rate_hz on `points` evenly spaced powers in [0, max_power_uw].
void write_fit_curve_csv(std::ostream& out, const FitResult& fit, double max_power_uw,
                         int points = 200);

/// coupler,state,ratio,sigma
void write_splitting_csv(std::ostream& out, const SplittingEstimate& estimate);

}  // namespace demux
