#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "demux/network.hpp"

namespace demux {

inline constexpr const char* kStateOn = "on";    // route to the cross branch
inline constexpr const char* kStateOff = "off";  // route to the through branch

/// Cyclic assignment of coupler states to pump-pulse time bins.
/// Pulse k uses bin k mod period.
struct SwitchSchedule {
  std::vector<std::map<CouplerId, std::string>> bins;
  std::vector<std::size_t> targets;  // intended output (1-based) per bin
  double bin_duration_s = 0.0;

  [[nodiscard]] std::size_t period() const { return bins.size(); }
  [[nodiscard]] const std::map<CouplerId, std::string>& states_at(
      std::uint64_t pulse) const {
    return bins[pulse % bins.size()];
  }

  /// First bin whose target is `output`; throws if the output is never targeted.
  [[nodiscard]] std::size_t bin_for_output(std::size_t output) const;

  void validate(const DemuxNetwork& network) const;
};

/// Bin k targets output k+1. Couplers on the target path take "on" or "off"
/// according to the branch; couplers off the path are left "on".
[[nodiscard]] SwitchSchedule schedule_for_cycle(const DemuxNetwork& network,
                                                std::size_t n_outputs,
                                                double bin_duration_s);

}  // namespace demux
