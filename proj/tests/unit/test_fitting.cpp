#include <doctest.h>

#include <cmath>
#include <sstream>

#include "demux/errors.hpp"
#include "demux/fitting.hpp"
#include "demux/rates.hpp"
#include "demux/report.hpp"
#include "support/saturation.hpp"

using namespace demux;

TEST_CASE("saturation fit recovers exact data") {
  const auto data = fixture::exact_saturation(fixture::kCmax, fixture::kP0);
  const auto fit = fit_saturation(data);
  CHECK(fit.converged);
  CHECK(fit.value("c_max_hz") == doctest::Approx(70.9).epsilon(1e-9));
  CHECK(fit.value("p0_uw") == doctest::Approx(348.0).epsilon(1e-9));
  CHECK(fit.sigma("c_max_hz") > 0.0);
  CHECK(fit.degrees_of_freedom == 10);
  CHECK(fit.chi_squared < 1e-12);
  CHECK_THROWS_AS((void)fit.value("nope"), DomainError);
}

TEST_CASE("saturation fit is insensitive to the start within 50%") {
  const auto data = fixture::exact_saturation(fixture::kCmax, fixture::kP0);
  for (const double fc : {0.5, 0.8, 1.2, 1.5}) {
    for (const double fp : {0.5, 0.9, 1.1, 1.5}) {
      FitOptions o;
      o.start = std::vector<double>{70.9 * fc, 348.0 * fp};
      const auto fit = fit_saturation(data, o);
      CHECK(fit.value("c_max_hz") == doctest::Approx(70.9).epsilon(1e-9));
      CHECK(fit.value("p0_uw") == doctest::Approx(348.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("saturation fit is scale equivariant") {
  auto data = fixture::noisy_saturation(4);
  const auto base = fit_saturation(data);
  for (auto& p : data) {
    p.rate_hz *= 2.0;
    p.sigma_hz *= 2.0;
  }
  const auto doubled = fit_saturation(data);
  CHECK(doubled.value("c_max_hz") == doctest::Approx(2.0 * base.value("c_max_hz")).epsilon(1e-8));
  CHECK(doubled.value("p0_uw") == doctest::Approx(base.value("p0_uw")).epsilon(1e-8));
  CHECK(doubled.sigma("c_max_hz") == doctest::Approx(2.0 * base.sigma("c_max_hz")).epsilon(1e-6));
}

TEST_CASE("saturation fit failures") {
  std::vector<SaturationPoint> two{{100, 10, 1}, {200, 20, 1}, {200, 21, 1}};
  CHECK_THROWS_AS((void)fit_saturation(two), DomainError);
  std::vector<SaturationPoint> flat;
  for (const double p : fixture::reference_powers()) flat.push_back({p, 50.0, 1.0});
  CHECK_THROWS_AS((void)fit_saturation(flat), NumericalError);
  std::vector<SaturationPoint> bad{{100, 10, 0}, {200, 20, 1}, {300, 21, 1}};
  CHECK_THROWS_AS((void)fit_saturation(bad), DomainError);
}

TEST_CASE("switching-efficiency fit recovers eta from exact rates") {
  const double r = 80e6;
  const double eta_sd = 0.0076;
  std::vector<NFoldCounts> rates;
  for (const int n : {2, 3}) {
    NFoldCounts c;
    c.n = n;
    c.cycle_period = static_cast<std::size_t>(n);
    c.acquisition_s = 120.0;
    c.rate_hz = n_fold_rate(n, r, eta_sd, 0.3, s_active(n, 0.78));
    c.rate_sigma_hz = 0.05 * c.rate_hz;
    rates.push_back(c);
  }
  const auto fit = fit_switching_efficiency(rates, r, 0.3, eta_sd);
  CHECK(fit.converged);
  CHECK_FALSE(fit.at_boundary);
  CHECK(std::abs(fit.value("eta_dm") - 0.78) < 1e-6);

  SUBCASE("period-4 cycle") {
    for (auto& c : rates) {
      c.cycle_period = 4;
      c.rate_hz = switched_nfold_rate(c.n, 4, r, eta_sd, 0.3, 0.78);
      c.rate_sigma_hz = 0.05 * c.rate_hz;
    }
    CHECK(std::abs(fit_switching_efficiency(rates, r, 0.3, eta_sd).value("eta_dm") - 0.78) < 1e-6);
  }
  SUBCASE("zero rates pin the boundary") {
    for (auto& c : rates) {
      c.rate_hz = 0.0;
      c.rate_sigma_hz = 0.0;
    }
    const auto z = fit_switching_efficiency(rates, r, 0.3, eta_sd);
    CHECK(z.at_boundary);
    CHECK(z.value("eta_dm") == 0.0);
    CHECK_FALSE(z.converged);
  }
  SUBCASE("rates above any eta") {
    for (auto& c : rates) c.rate_hz *= 10.0;
    const auto hi = fit_switching_efficiency(rates, r, 0.3, eta_sd);
    CHECK(hi.at_boundary);
    CHECK(hi.value("eta_dm") == doctest::Approx(1.0));
  }
  SUBCASE("needs both orders") {
    rates.pop_back();
    CHECK_THROWS_AS((void)fit_switching_efficiency(rates, r, 0.3, eta_sd), DomainError);
  }
}

TEST_CASE("saturation csv round trip") {
  const auto data = fixture::noisy_saturation(9);
  std::stringstream csv;
  write_saturation_csv(csv, data);
  std::stringstream with_comments("# measured\n" + csv.str() + "\n# end\n");
  const auto back = read_saturation_csv(with_comments);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].power_uw == data[i].power_uw);
    CHECK(back[i].rate_hz == data[i].rate_hz);
    CHECK(back[i].sigma_hz == data[i].sigma_hz);
  }
  std::stringstream bad("power_uw,rate_hz,sigma_hz\n1,2\n");
  CHECK_THROWS_AS((void)read_saturation_csv(bad), DataError);
}

TEST_CASE("fit curve and prediction csv") {
  const auto fit = fit_saturation(fixture::exact_saturation(70.9, 348.0));
  std::stringstream curve;
  write_fit_curve_csv(curve, fit, 1000.0, 3);
  std::string line;
  std::getline(curve, line);
  CHECK(line == "power_uw,model_rate_hz");
  std::getline(curve, line);
  CHECK(line == "0,0");

  std::stringstream pred;
  const std::vector<RatePrediction> rows{{2, Scheme::probabilistic, 0.25}};
  write_predictions_csv(pred, rows);
  CHECK(pred.str() == "n,scheme,rate_hz\n2,probabilistic,0.25\n");
}

TEST_CASE("switching-efficiency fit prefers the efficient branch on a tie") {
  const double r = 80e6;
  const double eta_sd = 0.00760362;
  NFoldCounts two;
  two.n = 2;
  two.cycle_period = 4;
  two.acquisition_s = 12.5;
  two.count = 767;
  two.rate_hz = 767 / 12.5;
  two.rate_sigma_hz = std::sqrt(767.0) / 12.5;
  NFoldCounts three = two;
  three.n = 3;
  three.count = 0;
  three.rate_hz = 0.0;
  three.rate_sigma_hz = 0.0;
  std::vector<NFoldCounts> rates{two, three};

  const auto fit = fit_switching_efficiency(rates, r, 0.3, eta_sd);
  CHECK(fit.converged);
  CHECK(fit.value("eta_dm") > 0.5);
  CHECK(fit.diagnostics.find("mirror") != std::string::npos);

  SUBCASE("decisive data keep the low branch") {
    for (auto& c : rates) {
      c.rate_hz = switched_nfold_rate(c.n, 4, r, eta_sd, 0.3, 0.2);
      c.rate_sigma_hz = 1e-3 * c.rate_hz;
    }
    const auto low = fit_switching_efficiency(rates, r, 0.3, eta_sd);
    CHECK(low.value("eta_dm") == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(low.diagnostics.empty());
  }
}
