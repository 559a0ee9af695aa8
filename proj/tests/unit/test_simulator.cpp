#include <doctest.h>

#include <cmath>

#include "demux/errors.hpp"
#include "demux/rng.hpp"
#include "demux/routing.hpp"
#include "demux/simulator.hpp"
#include "support/reference.hpp"

using namespace demux;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32(Philox4x32::Key{0, 0})(C{0, 0, 0, 0}) ==
        C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32(Philox4x32::Key{0xffffffff, 0xffffffff})(
            C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32(Philox4x32::Key{0xa4093822, 0x299f31d0})(
            C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("pulse draws are uniform and keyed") {
  const PulseRandom rng(11);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform(static_cast<std::uint64_t>(k), 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(rng.uniform(5, 1) != rng.uniform(5, 2));
  CHECK(rng.uniform(5, 1) == PulseRandom(11).uniform(5, 1));
  CHECK(rng.uniform(5, 1) != PulseRandom(12).uniform(5, 1));
}

TEST_CASE("emission model reproduces g2") {
  EmitterParams e;
  e.max_brightness = 0.2;
  e.g2_zero = 0.029;
  const auto m = emission_model(e, 1e6);
  CHECK(m.p_any == doctest::Approx(0.2));
  CHECK(m.g2_zero() == doctest::Approx(0.029).epsilon(1e-12));
  const double p1 = m.p_one();
  CHECK(2 * m.p_two / ((p1 + 2 * m.p_two) * (p1 + 2 * m.p_two)) == doctest::Approx(0.029));
  e.g2_zero = 0.0;
  CHECK(emission_model(e, 1e6).p_two == 0.0);
  e.max_brightness = 1.0;
  e.g2_zero = 0.9;
  CHECK_THROWS_AS((void)emission_model(e, 1e9), ConfigError);
}

TEST_CASE("zero detector efficiency gives an empty stream") {
  auto c = fixture::reference_sim(100000, 1);
  c.eta_det = 0.0;
  CHECK(simulate(c).records.empty());
}

TEST_CASE("stream is ordered and on the pulse clock") {
  const auto s = simulate(fixture::reference_sim(2000000, 5));
  REQUIRE(!s.records.empty());
  CHECK(s.metadata.pulse_period_ps == 12500);
  validate_stream(s);
  for (const auto& r : s.records) {
    CHECK(r.timestamp_ps % 12500 == 0);
    CHECK(r.timestamp_ps / 12500 < 2000000);
  }
}

TEST_CASE("determinism and sharding") {
  const auto c = fixture::reference_sim(400000, 99);
  const auto one = simulate(c);
  CHECK(one == simulate(c));
  CHECK(one == shard_and_merge(c, 1));
  CHECK(one == shard_and_merge(c, 4));
  CHECK(one == shard_and_merge(c, 7));
  auto tiny = fixture::reference_sim(3, 99);
  CHECK(simulate(tiny) == shard_and_merge(tiny, 8));
  auto other = c;
  other.rng_seed = 100;
  CHECK(simulate(other).records != one.records);
  CHECK_THROWS_AS((void)shard_and_merge(c, 0), DomainError);
}

TEST_CASE("singles converge to the closed form") {
  const auto c = fixture::reference_sim(10000000, 2024);
  const auto s = simulate(c);
  const auto m = bin_routing(c.network, c.schedule, c.couplers);
  const auto e = emission_model(c.emitter, c.pump_power_uw);
  const double p_click = compose_transmission(c.budget) * c.eta_det;
  std::vector<double> counts(4, 0.0);
  for (const auto& r : s.records) counts[r.channel - 1] += 1.0;
  for (std::size_t o = 0; o < 4; ++o) {
    double share = 0.0;
    for (std::size_t k = 0; k < 4; ++k) share += m[k][o] / 4.0;
    // Exact click probability per pulse including the two-photon term.
    const double q = share * p_click;
    const double p = e.p_one() * q + e.p_two * (1.0 - (1.0 - q) * (1.0 - q));
    const double expected = p * 1e7;
    CHECK(std::abs(counts[o] - expected) < 4.0 * std::sqrt(expected));
  }
  double total = 0.0;
  for (const double x : counts) total += x;
  const double closed = 0.0076 * 0.30 * 1e7;
  CHECK(std::abs(total - closed) < 4.0 * std::sqrt(closed) + 0.01 * closed);
}

TEST_CASE("digest tracks physics only") {
  const auto a = fixture::reference_sim(10, 1);
  auto b = fixture::reference_sim(99, 2);
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 16);
  b.eta_det = 0.31;
  CHECK(a.digest() != b.digest());
  auto c = fixture::reference_sim(10, 1);
  c.couplers.set("s2", "off", {0.14, 0.0});
  CHECK(a.digest() != c.digest());
}

TEST_CASE("configuration validation") {
  auto c = fixture::reference_sim(10, 1);
  c.duration_s = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.pulse_count.reset();
  CHECK(c.resolved_pulse_count() == 80000000);
  auto d = fixture::reference_sim(10, 1);
  d.eta_det = 1.5;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  auto e = fixture::reference_sim(10, 1);
  e.couplers = CouplerTable{};
  CHECK_THROWS(e.validate());
}

TEST_CASE("dark counts add clicks on every channel") {
  auto c = fixture::reference_sim(1000000, 8);
  c.eta_det = 0.0;
  c.dark_count_probability = 1e-3;
  const auto s = simulate(c);
  const double expected = 4e3;
  CHECK(std::abs(static_cast<double>(s.records.size()) - expected) < 5 * std::sqrt(expected));
}
