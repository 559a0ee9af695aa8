#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "demux/coupler.hpp"
#include "demux/network.hpp"
#include "demux/schedule.hpp"

namespace demux {

/// Probability of reaching each output (index 0 is output 1): the product of
/// branch probabilities along the root-to-leaf path. Lossless, sums to one.
[[nodiscard]] std::vector<double> routing_matrix(
    const DemuxNetwork& network, const std::map<CouplerId, CouplerState>& states);

/// Coupler states in effect during schedule bin `bin`.
[[nodiscard]] std::map<CouplerId, CouplerState> states_for_bin(
    const SwitchSchedule& schedule, std::size_t bin, const CouplerTable& couplers);

/// Routing vector for every schedule bin, indexed [bin][output - 1].
[[nodiscard]] std::vector<std::vector<double>> bin_routing(
    const DemuxNetwork& network, const SwitchSchedule& schedule,
    const CouplerTable& couplers);

/// Mean over bins of the probability of reaching that bin's target output.
[[nodiscard]] double switching_efficiency(const DemuxNetwork& network,
                                          const SwitchSchedule& schedule,
                                          const CouplerTable& couplers);

/// Same as above from precomputed bin routing vectors.
[[nodiscard]] double switching_efficiency(
    const std::vector<std::vector<double>>& routing,
    const std::vector<std::size_t>& targets);

/// Routing part of the n-fold coincidence probability for `channels` once
/// each channel is delayed back to its scheduled bin: averaged over the start
/// phase, the product of the probabilities that the photon of bin
/// (phase + offset_j) reaches channel j.
[[nodiscard]] double coincidence_factor(const DemuxNetwork& network,
                                        const SwitchSchedule& schedule,
                                        const CouplerTable& couplers,
                                        std::span<const std::uint32_t> channels);

/// Scheduled bin offset of every channel relative to the earliest one.
[[nodiscard]] std::vector<std::uint64_t> channel_offsets(
    const SwitchSchedule& schedule, std::span<const std::uint32_t> channels);

}  // namespace demux
