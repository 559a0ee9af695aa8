#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "demux/errors.hpp"
#include "demux/histogram.hpp"
#include "demux/nfold.hpp"
#include "demux/routing.hpp"
#include "demux/simulator.hpp"
#include "oracles/oracles.hpp"
#include "support/reference.hpp"

using namespace demux;

namespace {

// Dense random stream: clicks on 4 channels at random pulses.
TimeTagStream random_stream(std::size_t pulses, double p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution click(p);
  TimeTagStream s;
  s.metadata.pulse_period_ps = 12500;
  s.metadata.pulse_count = pulses;
  s.metadata.channel_count = 4;
  s.metadata.schedule_period = 4;
  s.metadata.pump_rate_hz = 80e6;
  for (std::uint64_t k = 0; k < pulses; ++k) {
    for (std::uint32_t c = 1; c <= 4; ++c) {
      if (click(gen)) s.records.push_back({c, k * 12500});
    }
  }
  return s;
}

}  // namespace

TEST_CASE("histogram equals brute-force pair counting") {
  const auto s = random_stream(6000, 0.3, 17);
  REQUIRE(s.records.size() <= 10000);
  for (const auto& [a, b] : {std::pair{1u, 2u}, std::pair{3u, 1u}, std::pair{2u, 4u}}) {
    const auto h = histogram(s, a, b, 12);
    const auto brute = oracle::brute_force_pairs(s.records, a, b, 12, 12500);
    std::uint64_t total = 0;
    for (int d = -12; d <= 12; ++d) {
      const auto it = brute.find(d);
      CHECK(h.at(d) == (it == brute.end() ? 0 : it->second));
      total += it == brute.end() ? 0 : it->second;
    }
    CHECK(h.total() == total);
  }
}

TEST_CASE("histogram symmetry and edge cases") {
  const auto s = random_stream(3000, 0.2, 5);
  const auto ab = histogram(s, 1, 3, 8);
  const auto ba = histogram(s, 3, 1, 8);
  for (int d = -8; d <= 8; ++d) CHECK(ab.at(d) == ba.at(-d));
  CHECK(ab.reversed().counts == ba.counts);
  CHECK(ab.bin_width_ps == 12500);
  CHECK_THROWS_AS((void)histogram(s, 2, 2, 8), DomainError);

  TimeTagStream empty = s;
  empty.records.clear();
  const auto h = histogram(empty, 1, 2, 8);
  CHECK(h.counts.size() == 17);
  CHECK(h.total() == 0);
}

TEST_CASE("scheduled delay dominates the (1,2) histogram") {
  const auto s = simulate(fixture::reference_sim(20000000, 21));
  const auto h = histogram(s, 1, 2, 8);
  for (int d = -8; d <= 8; ++d) {
    if (d != 1 && d != -3 && d != 5 && d != -7) CHECK(h.at(d) < h.at(1));
  }
  // Same phase relation one cycle later.
  CHECK(h.at(5) > h.at(2));
}

TEST_CASE("zero-delay ratio of a synthetic histogram") {
  CoincidenceHistogram h{1, 2, 12500, 8, std::vector<std::uint64_t>(17, 7)};
  h.counts[8] = 3;   // d = 0
  h.counts[4] = 100; // d = -4
  h.counts[12] = 100;
  h.counts[0] = 100; // d = -8
  h.counts[16] = 100;
  const std::vector<CoincidenceHistogram> hs{h};
  const auto r = zero_delay_ratio(hs, 4);
  CHECK(r.cycle_peaks == 4);
  CHECK(r.ratio == doctest::Approx(0.03));
  CHECK(r.sigma == doctest::Approx(std::sqrt(3.0 / 1e4 + 0.03 * 0.03 / 400.0)));
  CoincidenceHistogram empty{1, 2, 12500, 8, std::vector<std::uint64_t>(17, 0)};
  CHECK_THROWS_AS((void)zero_delay_ratio(std::vector{empty}, 4), EstimationError);
  CHECK_THROWS_AS((void)zero_delay_ratio(hs, 9), DomainError);
}

TEST_CASE("count_nfold equals brute force") {
  const auto s = random_stream(5000, 0.3, 9);
  const auto net = DemuxNetwork::balanced_tree(4);
  const auto sched = schedule_for_cycle(net, 4, 12.5e-9);
  for (const auto& channels : {std::vector<std::uint32_t>{1, 2}, std::vector<std::uint32_t>{1, 2, 3},
                               std::vector<std::uint32_t>{4, 2}, std::vector<std::uint32_t>{1, 2, 3, 4}}) {
    const auto offs = channel_offsets(sched, channels);
    const auto c = count_nfold(s, channels, 4 * 12.5e-9, sched);
    CHECK(c.count == oracle::brute_force_nfold(s.records, channels, offs, 12500, 5000));
    CHECK(c.n == static_cast<int>(channels.size()));
    CHECK(c.rate_hz == doctest::Approx(c.count / (5000 / 80e6)));
    CHECK(c.rate_sigma_hz == doctest::Approx(std::sqrt(c.count) / (5000 / 80e6)));
  }
  const std::vector<std::uint32_t> one{3};
  const auto singles = count_nfold(s, one, 0.0, sched);
  CHECK(singles.rate_hz == doctest::Approx(singles_rates(s)[2]));
  const std::vector<std::uint32_t> pair{1, 3};
  CHECK_THROWS_AS((void)count_nfold(s, pair, 12.5e-9, sched), ConfigError);
}

TEST_CASE("two-fold count matches the histogram peak at the scheduled delay") {
  const auto s = simulate(fixture::reference_sim(10000000, 31));
  const auto c = fixture::reference_sim(1, 1);
  const std::vector<std::uint32_t> pair{1, 2};
  const auto n2 = count_nfold(s, pair, 2 * 12.5e-9, c.schedule);
  CHECK(n2.count == histogram(s, 1, 2, 2).at(1));
}

TEST_CASE("eta_sd from singles") {
  const std::vector<double> rates{45600, 45600, 45600, 45600};
  CHECK(eta_sd_from_singles(rates, 80e6, 0.30) == doctest::Approx(0.0076));
  CHECK(eta_sd_from_singles(std::vector<double>(4, 0.0), 80e6, 0.3) == 0.0);
  CHECK_THROWS_AS((void)eta_sd_from_singles(rates, 80e6, 0.0), DomainError);
  CHECK_THROWS_AS((void)eta_sd_from_singles(rates, 1e5, 0.3), DataError);
}
