#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "demux/stream.hpp"

namespace demux {

/// Start-stop coincidences between channel a (start) and channel b (stop),
/// binned by signed delay t_b - t_a in units of `bin_width_ps`.
struct CoincidenceHistogram {
  std::uint32_t a = 1;
  std::uint32_t b = 2;
  std::uint64_t bin_width_ps = 0;
  int max_delay_bins = 0;
  std::vector<std::uint64_t> counts;  // delays -max..+max

  [[nodiscard]] std::uint64_t at(int delay) const;
  [[nodiscard]] std::uint64_t total() const;
  /// Histogram of (b, a): same counts mirrored in delay.
  [[nodiscard]] CoincidenceHistogram reversed() const;
};

/// Single pass over the ordered stream. `bin_width_ps` defaults to the pulse
/// period recorded in the stream metadata.
[[nodiscard]] CoincidenceHistogram histogram(
    const TimeTagStream& stream, std::uint32_t a, std::uint32_t b,
    int max_delay_bins, std::optional<std::uint64_t> bin_width_ps = std::nullopt);

/// Zero-delay coincidences relative to the coincidences between pulses that
/// share a schedule phase (delays that are non-zero multiples of `period`).
struct ZeroDelayRatio {
  double ratio = 0.0;
  double sigma = 0.0;
  std::uint64_t zero_delay_counts = 0;
  double mean_cycle_peak = 0.0;
  std::size_t cycle_peaks = 0;
};

/// Sums the given cross-channel histograms before forming the ratio, which
/// estimates the source g2(0).
[[nodiscard]] ZeroDelayRatio zero_delay_ratio(
    std::span<const CoincidenceHistogram> histograms, std::size_t period);

}  // namespace demux
