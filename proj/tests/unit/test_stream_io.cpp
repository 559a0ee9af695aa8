#include <doctest.h>

#include <fstream>
#include <sstream>

#include "demux/errors.hpp"
#include "demux/simulator.hpp"
#include "demux/stream_io.hpp"
#include "support/reference.hpp"
#include "support/temp_dir.hpp"

using namespace demux;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("binary layout is little-endian and columnar") {
  std::ostringstream out;
  write_records_binary({{2, 0x0102030405060708ull}, {3, 9}}, out);
  const std::string b = out.str();
  REQUIRE(b.size() == 8 + 4 + 4 + 8 + 2 * 4 + 2 * 8);
  CHECK(b.substr(0, 7) == "DMXTAGS");
  CHECK(b[7] == '\0');
  CHECK(b[8] == 1);
  CHECK(b[16] == 2);
  CHECK(b[24] == 2);
  CHECK(b[28] == 3);
  CHECK(static_cast<unsigned char>(b[32]) == 0x08);
  CHECK(static_cast<unsigned char>(b[39]) == 0x01);
}

TEST_CASE("stream round trip is exact") {
  const fixture::TempDir dir;
  const auto s = simulate(fixture::reference_sim(500000, 3));
  REQUIRE(!s.records.empty());
  write_stream(s, dir / "run.tags");
  CHECK(std::filesystem::exists(dir / "run.tags.meta.json"));
  CHECK(read_stream(dir / "run.tags") == s);

  write_stream(read_stream(dir / "run.tags"), dir / "again.tags");
  CHECK(slurp(dir / "run.tags") == slurp(dir / "again.tags"));
}

TEST_CASE("csv round trip is exact") {
  const auto s = simulate(fixture::reference_sim(300000, 4));
  std::stringstream csv;
  write_records_csv(s.records, csv);
  CHECK(csv.str().rfind("channel,timestamp_ps\n", 0) == 0);
  CHECK(read_records_csv(csv) == s.records);

  std::istringstream bad("channel,timestamp_ps\n1,x\n");
  CHECK_THROWS_AS((void)read_records_csv(bad), IoError);
  std::istringstream headless("1,2\n");
  CHECK_THROWS_AS((void)read_records_csv(headless), IoError);
}

TEST_CASE("empty stream is a valid file") {
  const fixture::TempDir dir;
  const auto s = simulate(fixture::reference_sim(0, 1));
  CHECK(s.records.empty());
  write_stream(s, dir / "empty.tags");
  CHECK(std::filesystem::file_size(dir / "empty.tags") == 24);
  CHECK(read_stream(dir / "empty.tags") == s);
}

TEST_CASE("damaged files are rejected") {
  const fixture::TempDir dir;
  const auto s = simulate(fixture::reference_sim(200000, 5));
  write_stream(s, dir / "ok.tags");
  const auto bytes = slurp(dir / "ok.tags");

  SUBCASE("truncated") {
    std::ofstream(dir / "ok.tags", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS((void)read_stream(dir / "ok.tags"), IoError);
  }
  SUBCASE("bad magic") {
    auto copy = bytes;
    copy[0] = 'X';
    std::ofstream(dir / "ok.tags", std::ios::binary) << copy;
    CHECK_THROWS_AS((void)read_stream(dir / "ok.tags"), IoError);
  }
  SUBCASE("missing sidecar") {
    std::filesystem::remove(sidecar_path(dir / "ok.tags"));
    CHECK_THROWS_AS((void)read_stream(dir / "ok.tags"), IoError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS((void)read_stream(dir / "nope.tags"), IoError); }
  SUBCASE("unwritable") {
    CHECK_THROWS_AS(write_stream(s, dir / "no-such-dir" / "x.tags"), IoError);
  }
}

TEST_CASE("metadata json") {
  StreamMetadata m{"abc", 12500, 10, 4, 4, 7, 8e7};
  CHECK(metadata_from_json(metadata_to_json(m, 3)) == m);
  CHECK_THROWS_AS((void)metadata_from_json("{\"format\": \"other\"}"), IoError);
  CHECK_THROWS_AS((void)metadata_from_json("not json"), IoError);
}
