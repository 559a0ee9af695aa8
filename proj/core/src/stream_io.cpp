#include "demux/stream_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "demux/errors.hpp"

namespace demux {
namespace {

constexpr std::array<char, 8> kMagic{'D', 'M', 'X', 'T', 'A', 'G', 'S', '\0'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw IoError("time-tag file is truncated");
  }
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void validate_stream(const TimeTagStream& stream) {
  const auto channels = stream.metadata.channel_count;
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const auto& r = stream.records[i];
    if (r.channel < 1 || (channels != 0 && r.channel > channels)) {
      throw DataError("record " + std::to_string(i) + " has channel " +
                      std::to_string(r.channel) + " outside 1.." +
                      std::to_string(channels));
    }
    if (i > 0 && !(stream.records[i - 1] < r)) {
      throw DataError("records are not strictly ordered at index " + std::to_string(i));
    }
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path& stream) {
  auto p = stream;
  p += ".meta.json";
  return p;
}

void write_records_binary(const std::vector<TimeTagRecord>& records, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kStreamFormatVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, records.size());
  for (const auto& r : records) put_le<std::uint32_t>(out, r.channel);
  for (const auto& r : records) put_le<std::uint64_t>(out, r.timestamp_ps);
}

std::vector<TimeTagRecord> read_records_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IoError("not a demux time-tag file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kStreamFormatVersion) {
    throw IoError("unsupported time-tag format version " + std::to_string(version));
  }
  (void)get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  std::vector<TimeTagRecord> records;
  // Guard the reservation against corrupt headers; grow naturally otherwise.
  records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) {
    records.push_back({get_le<std::uint32_t>(in), 0});
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    records[i].timestamp_ps = get_le<std::uint64_t>(in);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after time-tag columns");
  }
  return records;
}

std::string metadata_to_json(const StreamMetadata& meta, std::size_t record_count) {
  nlohmann::ordered_json j;
  j["format"] = "demux-timetags";
  j["version"] = kStreamFormatVersion;
  j["config_digest"] = meta.config_digest;
  j["pulse_period_ps"] = meta.pulse_period_ps;
  j["pulse_count"] = meta.pulse_count;
  j["channel_count"] = meta.channel_count;
  j["schedule_period"] = meta.schedule_period;
  j["seed"] = meta.seed;
  j["pump_rate_hz"] = meta.pump_rate_hz;
  j["record_count"] = record_count;
  return j.dump(2) + "\n";
}

StreamMetadata metadata_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "demux-timetags") {
      throw IoError("sidecar is not a demux time-tag metadata document");
    }
    StreamMetadata meta;
    meta.config_digest = j.at("config_digest").get<std::string>();
    meta.pulse_period_ps = j.at("pulse_period_ps").get<std::uint64_t>();
    meta.pulse_count = j.at("pulse_count").get<std::uint64_t>();
    meta.channel_count = j.at("channel_count").get<std::uint32_t>();
    meta.schedule_period = j.at("schedule_period").get<std::uint32_t>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.pump_rate_hz = j.at("pump_rate_hz").get<double>();
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed stream metadata: ") + e.what());
  }
}

void write_stream(const TimeTagStream& stream, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write_records_binary(stream.records, out);
    if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
  }
  const auto meta_path = sidecar_path(path);
  std::ofstream meta(meta_path, std::ios::trunc);
  if (!meta) throw IoError("cannot open '" + meta_path.string() + "' for writing");
  meta << metadata_to_json(stream.metadata, stream.records.size());
  if (!meta.flush()) throw IoError("failed writing '" + meta_path.string() + "'");
}

TimeTagStream read_stream(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  TimeTagStream stream;
  stream.records = read_records_binary(in);

  const auto meta_path = sidecar_path(path);
  std::ifstream meta(meta_path);
  if (!meta) throw IoError("missing metadata sidecar '" + meta_path.string() + "'");
  std::stringstream buf;
  buf << meta.rdbuf();
  stream.metadata = metadata_from_json(buf.str());
  try {
    validate_stream(stream);
  } catch (const DataError& e) {
    throw IoError(std::string("corrupt time-tag file: ") + e.what());
  }
  return stream;
}

void write_records_csv(const std::vector<TimeTagRecord>& records, std::ostream& out) {
  out << "channel,timestamp_ps\n";
  for (const auto& r : records) out << r.channel << ',' << r.timestamp_ps << '\n';
}

std::vector<TimeTagRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "channel,timestamp_ps") {
    throw IoError("expected CSV header 'channel,timestamp_ps'");
  }
  std::vector<TimeTagRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      std::size_t used = 0;
      const auto channel = std::stoul(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("channel");
      const auto rest = line.substr(comma + 1);
      const auto ts = std::stoull(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("timestamp");
      records.push_back({static_cast<std::uint32_t>(channel), ts});
    } catch (const std::logic_error&) {
      throw IoError("malformed CSV record on line " + std::to_string(line_no));
    }
  }
  return records;
}

}  // namespace demux
