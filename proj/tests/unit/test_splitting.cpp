#include <doctest.h>

#include <cmath>
#include <string>

#include "demux/errors.hpp"
#include "demux/histogram.hpp"
#include "demux/routing.hpp"
#include "demux/simulator.hpp"
#include "demux/splitting.hpp"
#include "support/reference.hpp"

using namespace demux;

namespace {

std::vector<CoincidenceHistogram> pairs_with_channel_one(const TimeTagStream& s, int reach) {
  return {histogram(s, 1, 2, reach), histogram(s, 1, 3, reach), histogram(s, 1, 4, reach)};
}

const TimeTagStream& table1_stream() {
  static const TimeTagStream s = simulate(fixture::reference_sim(100000000, 77));
  return s;
}

}  // namespace

TEST_CASE("measured coupler ratios are recovered within 2 sigma") {
  const auto c = fixture::reference_sim(1, 1);
  const auto hists = pairs_with_channel_one(table1_stream(), 16);
  const auto est = estimate_splitting_ratios(hists, c.network, c.schedule);
  REQUIRE(est.parameters.size() == 6);
  for (std::size_t i = 0; i < est.parameters.size(); ++i) {
    const auto& [id, state] = est.parameters[i];
    const double truth = c.couplers.ratio(id, state);
    INFO(id, "/", state, " = ", est.ratios[i].value, " +/- ", est.ratios[i].sigma);
    CHECK(est.ratios[i].sigma > 0.0);
    CHECK(std::abs(est.ratios[i].value - truth) < 2.0 * est.ratios[i].sigma);
  }
  CHECK(est.at("s2", "off").value == est.ratios[2].value);
  CHECK_THROWS_AS((void)est.at("s9", "on"), DomainError);

  const auto eta = switching_efficiency_estimate(c.network, c.schedule, est);
  const double truth = switching_efficiency(c.network, c.schedule, c.couplers);
  INFO("eta ", eta.value, " +/- ", eta.sigma);
  CHECK(std::abs(eta.value - truth) < 2.0 * eta.sigma);
  CHECK(eta.value == doctest::Approx(switching_efficiency(c.network, c.schedule, est.as_table())));
}

TEST_CASE("all pairs give the same answer family") {
  const auto c = fixture::reference_sim(1, 1);
  const auto& s = table1_stream();
  std::vector<CoincidenceHistogram> all;
  for (std::uint32_t a = 1; a <= 4; ++a) {
    for (std::uint32_t b = 1; b <= 4; ++b) {
      if (a < b) all.push_back(histogram(s, b, a, 12));  // reversed orientation on purpose
    }
  }
  const auto est = estimate_splitting_ratios(all, c.network, c.schedule);
  const auto eta = switching_efficiency_estimate(c.network, c.schedule, est);
  CHECK(std::abs(eta.value - 0.809625) < 2.0 * eta.sigma);
}

TEST_CASE("ideal couplers come back as 1 and 0") {
  auto c = fixture::reference_sim(30000000, 5);
  for (const auto& id : c.network.coupler_ids()) {
    c.couplers.set(id, "on", {1.0, 0.0});
    c.couplers.set(id, "off", {0.0, 0.0});
  }
  const auto est = estimate_splitting_ratios(pairs_with_channel_one(simulate(c), 8), c.network,
                                             c.schedule);
  for (std::size_t i = 0; i < est.parameters.size(); ++i) {
    const double truth = est.parameters[i].second == "on" ? 1.0 : 0.0;
    INFO(est.parameters[i].first, "/", est.parameters[i].second);
    CHECK(std::abs(est.ratios[i].value - truth) < 0.01);
  }
}

TEST_CASE("estimator errors") {
  const auto c = fixture::reference_sim(1, 1);
  const auto& s = table1_stream();
  SUBCASE("missing pairs are named") {
    const std::vector<CoincidenceHistogram> some{histogram(s, 1, 2, 8), histogram(s, 2, 3, 8)};
    try {
      (void)estimate_splitting_ratios(some, c.network, c.schedule);
      FAIL("expected EstimationError");
    } catch (const EstimationError& e) {
      const std::string what = e.what();
      CHECK(what.find("(1,3)") != std::string::npos);
      CHECK(what.find("(1,4)") != std::string::npos);
    }
  }
  SUBCASE("zero counts") {
    TimeTagStream empty = s;
    empty.records.clear();
    CHECK_THROWS_AS((void)estimate_splitting_ratios(pairs_with_channel_one(empty, 8), c.network,
                                                    c.schedule),
                    EstimationError);
  }
  SUBCASE("duplicate pair") {
    const std::vector<CoincidenceHistogram> dup{histogram(s, 1, 2, 8), histogram(s, 2, 1, 8),
                                                histogram(s, 1, 3, 8), histogram(s, 1, 4, 8)};
    CHECK_THROWS_AS((void)estimate_splitting_ratios(dup, c.network, c.schedule), EstimationError);
  }
  SUBCASE("range shorter than a period") {
    CHECK_THROWS_AS((void)estimate_splitting_ratios(pairs_with_channel_one(s, 2), c.network,
                                                    c.schedule),
                    EstimationError);
  }
}
