#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace demux {

/// One detector click.
struct TimeTagRecord {
  std::uint32_t channel = 1;       // output channel, 1-based
  std::uint64_t timestamp_ps = 0;  // since run start

  [[nodiscard]] double timestamp_s() const { return timestamp_ps * 1e-12; }

  friend auto operator<=>(const TimeTagRecord& a, const TimeTagRecord& b) {
    if (auto c = a.timestamp_ps <=> b.timestamp_ps; c != 0) return c;
    return a.channel <=> b.channel;
  }
  friend bool operator==(const TimeTagRecord&, const TimeTagRecord&) = default;
};

struct StreamMetadata {
  std::string config_digest;
  std::uint64_t pulse_period_ps = 0;
  std::uint64_t pulse_count = 0;
  std::uint32_t channel_count = 0;
  std::uint32_t schedule_period = 0;
  std::uint64_t seed = 0;
  double pump_rate_hz = 0.0;

  [[nodiscard]] double acquisition_s() const {
    return pump_rate_hz > 0.0 ? static_cast<double>(pulse_count) / pump_rate_hz
                              : 0.0;
  }

  friend bool operator==(const StreamMetadata&, const StreamMetadata&) = default;
};

/// Detection records sorted by (timestamp, channel).
struct TimeTagStream {
  std::vector<TimeTagRecord> records;
  StreamMetadata metadata;

  friend bool operator==(const TimeTagStream&, const TimeTagStream&) = default;
};

/// Throws DataError when records are unsorted or reference bad channels.
void validate_stream(const TimeTagStream& stream);

}  // namespace demux
