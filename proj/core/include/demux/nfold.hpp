#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "demux/schedule.hpp"
#include "demux/stream.hpp"

namespace demux {

/// n-fold coincidences between a set of output channels.
struct NFoldCounts {
  int n = 0;
  std::vector<std::uint32_t> channels;
  double window_s = 0.0;
  std::uint64_t count = 0;
  double acquisition_s = 0.0;
  double rate_hz = 0.0;
  double rate_sigma_hz = 0.0;  // Poisson, sqrt(count) / acquisition
  std::size_t cycle_period = 0;  // pulses per switching cycle
};

/// Delays every channel back by its scheduled bin (the delay lines at the
/// chip output), then counts pulses on which all channels clicked. The raw
/// `window_s` must cover the schedule span of the selected channels.
[[nodiscard]] NFoldCounts count_nfold(const TimeTagStream& stream,
                                      std::span<const std::uint32_t> channels,
                                      double window_s,
                                      const SwitchSchedule& schedule);

/// Click rate of every channel, index 0 for channel 1.
[[nodiscard]] std::vector<double> singles_rates(const TimeTagStream& stream);

/// eta_SD = (sum of singles rates) / (R eta_det).
[[nodiscard]] double eta_sd_from_singles(std::span<const double> singles_hz,
                                         double pump_rate_hz, double eta_det);

}  // namespace demux
