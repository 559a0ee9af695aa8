#include "demux/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "demux/errors.hpp"

namespace demux {

std::uint64_t CoincidenceHistogram::at(int delay) const {
  if (delay < -max_delay_bins || delay > max_delay_bins) {
    throw DomainError("delay " + std::to_string(delay) + " outside histogram range");
  }
  return counts[static_cast<std::size_t>(delay + max_delay_bins)];
}

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t sum = 0;
  for (const auto c : counts) sum += c;
  return sum;
}

CoincidenceHistogram CoincidenceHistogram::reversed() const {
  CoincidenceHistogram out = *this;
  std::swap(out.a, out.b);
  out.counts.assign(counts.rbegin(), counts.rend());
  return out;
}

CoincidenceHistogram histogram(const TimeTagStream& stream, std::uint32_t a,
                               std::uint32_t b, int max_delay_bins,
                               std::optional<std::uint64_t> bin_width_ps) {
  if (a == b) {
    throw DomainError("cross-correlation needs two distinct channels (got " +
                      std::to_string(a) + " twice)");
  }
  if (a == 0 || b == 0) throw DomainError("channels are numbered from 1");
  const auto channels = stream.metadata.channel_count;
  if (channels != 0 && (a > channels || b > channels)) {
    throw DomainError("channel outside 1.." + std::to_string(channels));
  }
  if (max_delay_bins < 0) throw DomainError("max_delay_bins must be >= 0");

  CoincidenceHistogram h;
  h.a = a;
  h.b = b;
  h.bin_width_ps = bin_width_ps.value_or(stream.metadata.pulse_period_ps);
  if (h.bin_width_ps == 0) throw DomainError("histogram bin width must be > 0");
  h.max_delay_bins = max_delay_bins;
  h.counts.assign(2 * static_cast<std::size_t>(max_delay_bins) + 1, 0);

  const double width = static_cast<double>(h.bin_width_ps);
  const auto delay_bin = [width](std::uint64_t later, std::uint64_t earlier) {
    return std::llround(static_cast<double>(later - earlier) / width);
  };

  // Recent clicks of each channel still within reach of the next record.
  std::deque<std::uint64_t> recent_a;
  std::deque<std::uint64_t> recent_b;
  for (const auto& r : stream.records) {
    const bool is_a = r.channel == a;
    if (!is_a && r.channel != b) continue;
    auto& others = is_a ? recent_b : recent_a;
    while (!others.empty() && delay_bin(r.timestamp_ps, others.front()) > max_delay_bins) {
      others.pop_front();
    }
    for (const auto t : others) {
      const auto d = delay_bin(r.timestamp_ps, t);
      // Earlier b before a is a negative delay; earlier a before b positive.
      const long long delay = is_a ? -d : d;
      ++h.counts[static_cast<std::size_t>(delay + max_delay_bins)];
    }
    (is_a ? recent_a : recent_b).push_back(r.timestamp_ps);
  }
  return h;
}

ZeroDelayRatio zero_delay_ratio(std::span<const CoincidenceHistogram> histograms,
                                std::size_t period) {
  if (histograms.empty()) throw DomainError("no histograms given");
  if (period == 0) throw DomainError("schedule period must be >= 1");
  const int reach = histograms.front().max_delay_bins;
  for (const auto& h : histograms) {
    if (h.max_delay_bins != reach) {
      throw DomainError("histograms must share the same delay range");
    }
  }
  ZeroDelayRatio out;
  std::uint64_t cycle_total = 0;
  for (int d = -reach; d <= reach; ++d) {
    const bool zero = d == 0;
    const bool cycle = !zero && std::abs(d) % static_cast<long long>(period) == 0;
    if (!zero && !cycle) continue;
    if (cycle) ++out.cycle_peaks;
    for (const auto& h : histograms) {
      (zero ? out.zero_delay_counts : cycle_total) += h.at(d);
    }
  }
  if (out.cycle_peaks == 0) {
    throw DomainError("delay range shorter than one schedule period");
  }
  if (cycle_total == 0) {
    throw EstimationError("no coincidences at cycle delays; ratio undefined");
  }
  out.mean_cycle_peak = static_cast<double>(cycle_total) / out.cycle_peaks;
  out.ratio = out.zero_delay_counts / out.mean_cycle_peak;
  // Poisson errors of both sums; an empty zero bin still carries one count of
  // uncertainty.
  const double zero_var = std::max<double>(out.zero_delay_counts, 1.0);
  out.sigma = std::sqrt(zero_var / (out.mean_cycle_peak * out.mean_cycle_peak) +
                        out.ratio * out.ratio / static_cast<double>(cycle_total));
  return out;
}

}  // namespace demux
