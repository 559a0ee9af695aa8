#include <doctest.h>

#include <cmath>

#include "demux/errors.hpp"
#include "demux/rates.hpp"
#include "oracles/oracles.hpp"

using namespace demux;

TEST_CASE("s_active collapses to 1/n for ideal switching") {
  for (int n = 1; n <= 10; ++n) CHECK(s_active(n, 1.0) == 1.0 / n);
  CHECK(s_active(1, 0.78) == 1.0);
}

TEST_CASE("s_active two photons at eta 0.78") {
  CHECK(s_active(2, 0.78) == doctest::Approx(0.3284).epsilon(1e-12));
  CHECK(oracle::enumerate_uniform_misroute(2, 0.78) == doctest::Approx(0.3284).epsilon(1e-12));
}

TEST_CASE("s_active matches enumeration for n = 2, 3") {
  for (const int n : {2, 3}) {
    for (double eta = 0.0; eta <= 1.0; eta += 0.05) {
      CHECK(std::abs(s_active(n, eta) - oracle::enumerate_uniform_misroute(n, eta)) < 1e-12);
    }
  }
}

TEST_CASE("n = 4 differs from uniform-misroute enumeration") {
  const double eta = 0.78;
  const double enumerated = oracle::enumerate_uniform_misroute(4, eta);
  CHECK(std::abs(s_uniform_misroute(4, eta) - enumerated) < 1e-12);
  const double q = (1.0 - eta) / 3.0;
  // 9 derangements against the 3 the closed form counts.
  CHECK(enumerated - s_active(4, eta) == doctest::Approx(6.0 * std::pow(q, 4) / 4.0));
  CHECK(s_uniform_misroute(3, 0.6) == doctest::Approx(s_active(3, 0.6)).epsilon(1e-14));
}

TEST_CASE("s_active properties") {
  for (int n = 2; n <= 8; ++n) {
    double previous = 0.0;
    for (int i = 0; i <= 50; ++i) {
      const double eta = 0.5 + 0.01 * i;
      const double s = s_active(n, eta);
      CHECK(s >= previous);
      CHECK(s >= std::pow(eta, n) / n);
      CHECK(s <= 1.0);
      previous = s;
    }
  }
  CHECK_THROWS_AS((void)s_active(0, 0.5), DomainError);
  CHECK_THROWS_AS((void)s_active(2, -0.1), DomainError);
  CHECK_THROWS_AS((void)s_active(2, 1.1), DomainError);
}

TEST_CASE("s_probabilistic") {
  CHECK(s_probabilistic(1) == 1.0);
  CHECK(s_probabilistic(2) == 0.25);
  CHECK(s_probabilistic(6) == doctest::Approx(2.143e-5).epsilon(1e-3));
  for (int n = 1; n <= 10; ++n) CHECK(s_probabilistic(n) == 1.0 / oracle::self_power(n));
  CHECK_THROWS_AS((void)s_probabilistic(0), DomainError);
}

TEST_CASE("n_fold_rate") {
  CHECK(n_fold_rate(2, 8.0e7, 0.0076, 0.30, 0.3284) == doctest::Approx(136.6).epsilon(1e-3));
  CHECK(n_fold_rate(3, 8.0e7, 0.0076, 0.0, 0.5) == 0.0);
  CHECK(n_fold_rate(1, 8.0e7, 1.0, 1.0, 1.0) == 8.0e7);
  for (int n = 1; n <= 5; ++n) {
    const double single = n_fold_rate(n, 8.0e7, 0.01, 0.2, s_active(n, 0.8));
    const double doubled = n_fold_rate(n, 8.0e7, 0.01, 0.4, s_active(n, 0.8));
    CHECK(doubled == doctest::Approx(single * std::pow(2.0, n)).epsilon(1e-13));
  }
  CHECK_THROWS_AS((void)n_fold_rate(0, 1.0, 0.1, 0.1, 0.1), DomainError);
  CHECK_THROWS_AS((void)n_fold_rate(2, 1.0, 1.5, 0.1, 0.1), DomainError);
}

TEST_CASE("compose_transmission") {
  LossBudget b{0.85, 0.14, 0.14, 0.65, 5.0};
  const double direct = 0.85 * 0.86 * 0.86 * std::pow(10.0, -0.65 * 5.0 / 10.0);
  CHECK(compose_transmission(b) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(compose_transmission(b) == doctest::Approx(0.2975).epsilon(1e-3));

  SUBCASE("monotone decreasing in each loss") {
    const double t0 = compose_transmission(b);
    auto worse = b;
    worse.fresnel_in = 0.2;
    CHECK(compose_transmission(worse) < t0);
    worse = b;
    worse.fresnel_out = 0.2;
    CHECK(compose_transmission(worse) < t0);
    worse = b;
    worse.propagation_db_per_cm = 0.7;
    CHECK(compose_transmission(worse) < t0);
    worse = b;
    worse.device_length_cm = 6.0;
    CHECK(compose_transmission(worse) < t0);
    worse = b;
    worse.mode_overlap = 0.8;
    CHECK(compose_transmission(worse) < t0);
  }
  SUBCASE("measured value with coated facets") {
    LossBudget m;
    m.fresnel_in = 0.14;
    m.fresnel_out = 0.14;
    m.measured_transmission = 0.30;
    CHECK(compose_transmission(m) == 0.30);
    m.fresnel_removed = true;
    CHECK(compose_transmission(m) == doctest::Approx(0.30 / (0.86 * 0.86)).epsilon(1e-14));
  }
  SUBCASE("invalid") {
    b.fresnel_in = 1.0;
    CHECK_THROWS_AS((void)compose_transmission(b), DomainError);
  }
}

TEST_CASE("saturation_brightness") {
  double previous = -1.0;
  for (double p = 0.0; p <= 5000.0; p += 50.0) {
    const double s = saturation_brightness(p, 348.0, 0.15);
    CHECK(s > previous);
    CHECK(s <= 0.15);
    previous = s;
  }
  CHECK(saturation_brightness(0.0, 348.0, 0.15) == 0.0);
  CHECK(saturation_brightness(348.0, 348.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK_THROWS_AS((void)saturation_brightness(1.0, 0.0, 1.0), DomainError);
}

namespace {

PredictionSetup source_setup(double brightness, double fiber) {
  PredictionSetup s;
  s.source.pump_rate_hz = 80e6;
  s.source.max_brightness = brightness;
  s.source.fiber_coupling = fiber;
  s.budget.fresnel_in = 0.14;
  s.budget.fresnel_out = 0.14;
  s.budget.measured_transmission = 0.30;
  s.budget.fresnel_removed = true;
  s.eta_dm = 0.78;
  s.eta_det = 0.30;
  return s;
}

}  // namespace

TEST_CASE("six-photon source comparison") {
  const auto setup = source_setup(0.15, 0.65);
  const auto active = active_scheme(setup);
  const double eta_sd = 0.15 * 0.65 * 0.30 / (0.86 * 0.86);
  CHECK(active.eta_sd == doctest::Approx(eta_sd).epsilon(1e-14));
  const double direct = 80e6 * std::pow(eta_sd, 6) * s_active(6, 0.78);
  CHECK(active.rate(6) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(active.rate(6) == doctest::Approx(0.0115).epsilon(0.01));
  CHECK(crossover_n(active, probabilistic_scheme(setup), 8) == 5);

  const auto ding = source_setup(0.14, 1.0);
  CHECK(active_scheme(ding).rate(6) == doctest::Approx(0.100).epsilon(0.01));

  const auto rows = predict_rates(setup, 8);
  REQUIRE(rows.size() == 16);
  CHECK(rows[5].n == 6);
  CHECK(rows[5].scheme == Scheme::active);
  CHECK(rows[8].scheme == Scheme::probabilistic);
  CHECK(predict_rates(setup, 0).empty());
}

TEST_CASE("detector flag") {
  auto setup = source_setup(0.15, 0.65);
  const double without = active_scheme(setup).rate(6);
  setup.include_detectors = true;
  CHECK(active_scheme(setup).rate(6) == doctest::Approx(without * std::pow(0.3, 6)));
  const auto single = probabilistic_scheme(setup).predict(1);
  CHECK(single.rate_hz == doctest::Approx(80e6 * 0.15 * 0.65 * 0.30));
}

TEST_CASE("crossover edge cases") {
  PredictionSetup ideal;
  ideal.source.max_brightness = 0.5;
  ideal.eta_dm = 1.0;
  CHECK(crossover_n(active_scheme(ideal), probabilistic_scheme(ideal), 8) == 2);

  auto dim = ideal;
  dim.budget.measured_transmission = 1e-6;
  CHECK_FALSE(crossover_n(active_scheme(dim), probabilistic_scheme(dim), 8).has_value());
  CHECK_THROWS_AS((void)crossover_n(active_scheme(ideal), probabilistic_scheme(ideal), 1),
                  DomainError);
}
