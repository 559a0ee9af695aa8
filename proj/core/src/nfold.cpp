#include "demux/nfold.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "demux/errors.hpp"
#include "demux/routing.hpp"

namespace demux {
namespace {

double require_acquisition(const StreamMetadata& meta) {
  const double t = meta.acquisition_s();
  if (!(t > 0.0)) throw DomainError("stream has no acquisition time (zero pulses)");
  return t;
}

}  // namespace

NFoldCounts count_nfold(const TimeTagStream& stream,
                        std::span<const std::uint32_t> channels, double window_s,
                        const SwitchSchedule& schedule) {
  if (channels.empty()) throw DomainError("n-fold counting needs at least one channel");
  const std::set<std::uint32_t> unique(channels.begin(), channels.end());
  if (unique.size() != channels.size()) throw DomainError("channels must be distinct");
  const auto n_channels = stream.metadata.channel_count;
  for (const auto c : channels) {
    if (c < 1 || (n_channels != 0 && c > n_channels)) {
      throw DomainError("channel " + std::to_string(c) + " not in stream");
    }
  }
  const std::uint64_t period_ps = stream.metadata.pulse_period_ps;
  if (period_ps == 0) throw DomainError("stream has no pulse period");

  const auto offsets = channel_offsets(schedule, channels);
  const std::uint64_t span = *std::max_element(offsets.begin(), offsets.end());
  const double span_s = static_cast<double>(span * period_ps) * 1e-12;
  if (window_s < span_s * (1.0 - 1e-9)) {
    throw ConfigError("coincidence window " + std::to_string(window_s * 1e9) +
                      " ns is shorter than the schedule span " +
                      std::to_string(span_s * 1e9) + " ns of the selected channels");
  }

  // Aligned pulse index of every click, per selected channel.
  std::vector<std::vector<std::uint64_t>> aligned(channels.size());
  for (const auto& r : stream.records) {
    const auto it = std::find(channels.begin(), channels.end(), r.channel);
    if (it == channels.end()) continue;
    const auto j = static_cast<std::size_t>(it - channels.begin());
    const auto pulse = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(r.timestamp_ps) / static_cast<double>(period_ps)));
    if (pulse < offsets[j]) continue;
    aligned[j].push_back(pulse - offsets[j]);
  }

  std::vector<std::uint64_t> common = std::move(aligned[0]);
  for (std::size_t j = 1; j < aligned.size() && !common.empty(); ++j) {
    std::vector<std::uint64_t> next;
    std::set_intersection(common.begin(), common.end(), aligned[j].begin(),
                          aligned[j].end(), std::back_inserter(next));
    common = std::move(next);
  }

  NFoldCounts out;
  out.n = static_cast<int>(channels.size());
  out.channels.assign(channels.begin(), channels.end());
  out.window_s = window_s;
  out.count = common.size();
  out.acquisition_s = require_acquisition(stream.metadata);
  out.rate_hz = static_cast<double>(out.count) / out.acquisition_s;
  out.rate_sigma_hz = std::sqrt(static_cast<double>(out.count)) / out.acquisition_s;
  out.cycle_period = schedule.period();
  return out;
}

std::vector<double> singles_rates(const TimeTagStream& stream) {
  const double t = require_acquisition(stream.metadata);
  std::vector<double> counts(stream.metadata.channel_count, 0.0);
  for (const auto& r : stream.records) {
    if (r.channel < 1 || r.channel > counts.size()) {
      throw DataError("record on channel " + std::to_string(r.channel) +
                      " outside the stream's channel count");
    }
    counts[r.channel - 1] += 1.0;
  }
  for (auto& c : counts) c /= t;
  return counts;
}

double eta_sd_from_singles(std::span<const double> singles_hz, double pump_rate_hz,
                           double eta_det) {
  if (!(eta_det > 0.0 && eta_det <= 1.0)) {
    throw DomainError("detector efficiency must lie in (0, 1]");
  }
  if (!(pump_rate_hz > 0.0)) throw DomainError("pump rate must be > 0");
  double total = 0.0;
  for (const double r : singles_hz) {
    if (!(r >= 0.0)) throw DomainError("singles rates must be >= 0");
    total += r;
  }
  const double eta_sd = total / (pump_rate_hz * eta_det);
  if (eta_sd > 1.0) {
    throw DataError("singles imply eta_SD = " + std::to_string(eta_sd) +
                    " > 1; rates, pump rate and detector efficiency disagree");
  }
  return eta_sd;
}

}  // namespace demux
