#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "demux/coupler.hpp"
#include "demux/network.hpp"
#include "demux/rates.hpp"
#include "demux/schedule.hpp"
#include "demux/stream.hpp"

namespace demux {

/// Everything that determines a simulated time-tag stream.
struct SimConfig {
  EmitterParams emitter;
  DemuxNetwork network;
  SwitchSchedule schedule;
  CouplerTable couplers;
  LossBudget budget;
  double eta_det = 1.0;
  double dark_count_probability = 0.0;  // per channel per pulse
  double pump_power_uw = 0.0;
  std::optional<std::uint64_t> pulse_count;
  std::optional<double> duration_s;
  std::uint64_t rng_seed = 0;

  void validate() const;
  [[nodiscard]] std::uint64_t resolved_pulse_count() const;
  [[nodiscard]] std::uint64_t pulse_period_ps() const;

  /// Hex digest of the physics (everything except seed and run length).
  /// Streams carry it so analyses can refuse a mismatched configuration.
  [[nodiscard]] std::string digest() const;
};

/// Per-pulse photon-number distribution at the demultiplexer input.
struct EmissionModel {
  double p_any = 0.0;  // at least one photon
  double p_two = 0.0;  // two photons

  [[nodiscard]] double p_one() const { return p_any - p_two; }
  [[nodiscard]] double mean_photons() const { return p_any + p_two; }
  [[nodiscard]] double g2_zero() const;
};

/// The first photon is emitted with the saturated brightness at the given
/// pump power; a second one follows with the conditional probability that
/// makes 2 p2 / (p1 + 2 p2)^2 equal the configured g2(0).
[[nodiscard]] EmissionModel emission_model(const EmitterParams& emitter,
                                           double pump_power_uw);

/// Records for pulses [first, last) only; metadata left empty.
[[nodiscard]] std::vector<TimeTagRecord> simulate_pulses(const SimConfig& config,
                                                         std::uint64_t first,
                                                         std::uint64_t last);

[[nodiscard]] TimeTagStream simulate(const SimConfig& config);

/// Splits the pulse range into contiguous shards simulated concurrently.
/// Draws are keyed by global pulse index, so the result equals simulate().
[[nodiscard]] TimeTagStream shard_and_merge(const SimConfig& config,
                                            std::size_t n_shards);

}  // namespace demux
