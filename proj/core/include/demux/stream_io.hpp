#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "demux/stream.hpp"

namespace demux {

// Binary time-tag file, all integers little-endian:
//   8 bytes  magic "DMXTAGS\0"
//   u32      format version (1)
//   u32      reserved, zero
//   u64      record count N
//   N x u32  channel column
//   N x u64  timestamp column, picoseconds
// Metadata lives in a JSON sidecar next to the file (see sidecar_path).

inline constexpr std::uint32_t kStreamFormatVersion = 1;

[[nodiscard]] std::filesystem::path sidecar_path(const std::filesystem::path& stream);

void write_stream(const TimeTagStream& stream, const std::filesystem::path& path);
[[nodiscard]] TimeTagStream read_stream(const std::filesystem::path& path);

void write_records_binary(const std::vector<TimeTagRecord>& records, std::ostream& out);
[[nodiscard]] std::vector<TimeTagRecord> read_records_binary(std::istream& in);

[[nodiscard]] std::string metadata_to_json(const StreamMetadata& meta,
                                           std::size_t record_count);
[[nodiscard]] StreamMetadata metadata_from_json(const std::string& text);

/// CSV with header `channel,timestamp_ps`.
void write_records_csv(const std::vector<TimeTagRecord>& records, std::ostream& out);
[[nodiscard]] std::vector<TimeTagRecord> read_records_csv(std::istream& in);

}  // namespace demux
