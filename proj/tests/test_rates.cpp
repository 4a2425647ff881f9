#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "airig/rates.hpp"
#include "airig/solver.hpp"

#include <cmath>
#include <random>

using namespace airig;

namespace {

std::vector<IterRecord> power_trace(std::int64_t K, double cf, double af, double cp, double ap) {
  std::vector<IterRecord> recs;
  for (std::int64_t k = 0; k < K; ++k) {
    IterRecord r;
    r.k = k;
    r.f_bar = cf * std::pow(k + 1.0, af);
    r.phi_bar = cp * std::pow(k + 1.0, ap);
    recs.push_back(r);
  }
  return recs;
}

}  // namespace

TEST_CASE("line fit") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(fit_line({0, 1, 2}, {4, 4, 4}).slope == 0.0);
  CHECK(fit_line({0, 1, 2}, {4, 4, 4}).r2 == 1.0);
  CHECK_THROWS_AS(fit_line({1, 1}, {0, 1}), ContractViolation);
  CHECK_THROWS_AS(fit_line({1}, {0}), ContractViolation);
}

TEST_CASE("exact power law recovers its exponent") {
  const auto rep = fit_rates(power_trace(1000, 3.0, -0.5, 2.0, -0.25), 0.0);
  CHECK(std::abs(rep.slope_f + 0.5) <= 1e-9);
  CHECK(std::abs(rep.slope_phi + 0.25) <= 1e-9);
  CHECK(rep.r2_f == doctest::Approx(1.0));
  CHECK(rep.k_lo == 500);
  CHECK(rep.k_hi == 999);
  CHECK(rep.excluded_f == 0);
  CHECK_FALSE(rep.bound_check_f.has_value());
  CHECK(rep.to_json()["fit_window"] == nlohmann::json::array({500, 999}));
  CHECK(rep.to_json()["bound_check_phi"].is_null());
}

TEST_CASE("f_star shifts the suboptimality") {
  auto recs = power_trace(400, 3.0, -0.5, 1.0, -0.3);
  for (auto& r : recs) r.f_bar += 7.0;
  CHECK(std::abs(fit_rates(recs, 7.0).slope_f + 0.5) <= 1e-8);
}

TEST_CASE("constant trace has zero slope") {
  const auto rep = fit_rates(power_trace(200, 1.0, 0.0, 1.0, 0.0), 0.0, 1.0);
  CHECK(rep.slope_f == 0.0);
  CHECK(rep.slope_phi == 0.0);
}

TEST_CASE("noisy power law") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> noise(0.9, 1.1);
  auto recs = power_trace(10000, 5.0, -0.25, 5.0, -0.25);
  for (auto& r : recs) {
    r.f_bar *= noise(rng);
    r.phi_bar *= noise(rng);
  }
  const auto rep = fit_rates(recs, 0.0);
  CHECK(rep.slope_f >= -0.27);
  CHECK(rep.slope_f <= -0.23);
  CHECK(rep.slope_phi >= -0.27);
  CHECK(rep.slope_phi <= -0.23);
}

TEST_CASE("records at the floor are excluded and counted") {
  auto recs = power_trace(300, 1.0, -0.5, 1.0, -0.5);
  for (std::size_t i = 200; i < 300; i += 2) recs[i].phi_bar = 0.0;
  const auto rep = fit_rates(recs, 0.0);
  CHECK(rep.excluded_phi == 50);
  CHECK(rep.excluded_f == 0);
  CHECK(std::abs(rep.slope_phi + 0.5) <= 1e-9);
}

TEST_CASE("too few usable records is an error naming the counts") {
  auto recs = power_trace(60, 1.0, -0.5, 1.0, -0.5);
  try {
    fit_rates(recs, 0.0);
    FAIL("expected a contract violation");
  } catch (const ContractViolation& e) {
    const std::string msg = e.what();
    CHECK(msg.find("need 50") != std::string::npos);
    CHECK(msg.find("have 30") != std::string::npos);
    CHECK(msg.find("60 total") != std::string::npos);
  }
  CHECK_NOTHROW(fit_rates(recs, 0.0, 1.0));
  for (auto& r : recs) r.phi_bar = 0.0;
  CHECK_THROWS_AS(fit_rates(recs, 0.0, 1.0), ContractViolation);
  CHECK_THROWS_AS(fit_rates(recs, 0.0, 0.0), ContractViolation);
  CHECK_THROWS_AS(fit_rates(recs, NAN), ContractViolation);
}

TEST_CASE("bound checks against the rate bounds") {
  const ScheduleParams params{1.0, 1.0, 0.25, 0.0};
  const BoundEstimates c{2.0, 1.0, 1.5, 0.5};
  const RateBoundContext ctx{c, params, 2};
  auto recs = power_trace(400, 0.1, -0.25, 0.1, -0.25);
  auto rep = fit_rates(recs, 0.0, 0.5, ctx);
  REQUIRE(rep.bound_check_f.has_value());
  CHECK(*rep.bound_check_f);
  CHECK(*rep.bound_check_phi);

  recs[350].f_bar = 2.0 * suboptimality_bound(params, c, 2, 351);
  rep = fit_rates(recs, 0.0, 0.5, ctx);
  CHECK_FALSE(*rep.bound_check_f);
  CHECK(*rep.bound_check_phi);

  // Records below the bounds' range are not checked.
  recs = power_trace(100, 0.1, -0.25, 0.1, -0.25);
  recs[1].phi_bar = 1e6;
  CHECK(*fit_rates(recs, 0.0, 1.0, ctx).bound_check_phi);
}
