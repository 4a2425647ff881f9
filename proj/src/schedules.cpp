#include "airig/schedules.hpp"

#include "airig/common.hpp"

#include <cmath>
#include <string>

namespace airig {

void ScheduleParams::validate() const {
  require(gamma0 > 0.0, "gamma0 must be positive");
  require(eta0 > 0.0, "eta0 must be positive");
  require(b > 0.0 && b < 0.5, "b must lie strictly inside (0, 0.5)");
  require(r >= 0.0 && r < 1.0, "r must lie in [0, 1)");
}

nlohmann::json ScheduleParams::to_json() const {
  return {{"gamma0", gamma0}, {"eta0", eta0}, {"b", b}, {"r", r}};
}

ScheduleParams ScheduleParams::from_json(const nlohmann::json& j) {
  ScheduleParams p;
  p.gamma0 = j.value("gamma0", p.gamma0);
  p.eta0 = j.value("eta0", p.eta0);
  p.b = j.value("b", p.b);
  p.r = j.value("r", p.r);
  p.validate();
  return p;
}

double gamma(const ScheduleParams& params, std::int64_t k) {
  require(k >= 0, "gamma: k must be nonnegative");
  return params.gamma0 / std::sqrt(1.0 + static_cast<double>(k));
}

double eta(const ScheduleParams& params, std::int64_t k) {
  require(k >= 0, "eta: k must be nonnegative");
  return params.eta0 * std::pow(1.0 + static_cast<double>(k), -params.b);
}

std::int64_t harmonic_sum_threshold(double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  const double t = std::exp2(1.0 / (1.0 - alpha)) - 1.0;
  // 1/(1-alpha) is inexact for alpha like 0.9; absorb the rounding.
  return static_cast<std::int64_t>(std::ceil(t - 1e-9));
}

namespace {

HarmonicSumBounds sandwich(double alpha, std::int64_t N, double sum) {
  const double e = 1.0 - alpha;
  const double top = std::pow(static_cast<double>(N + 1), e);
  return {top / (2.0 * e), top / e, sum};
}

void require_threshold(double alpha, std::int64_t N) {
  const std::int64_t minimal = harmonic_sum_threshold(alpha);
  if (N < minimal) {
    throw ContractViolation("harmonic_sum_bounds: requires N >= " + std::to_string(minimal) +
                            " for alpha = " + std::to_string(alpha));
  }
}

}  // namespace

HarmonicSumBounds harmonic_sum_bounds(double alpha, std::int64_t N) {
  require_threshold(alpha, N);
  double sum = 0.0;
  for (std::int64_t k = 0; k <= N; ++k) sum += std::pow(static_cast<double>(k + 1), -alpha);
  return sandwich(alpha, N, sum);
}

std::vector<HarmonicSumBounds> harmonic_sum_sweep(double alpha, std::int64_t N_lo, std::int64_t N_hi) {
  require_threshold(alpha, N_lo);
  require(N_hi >= N_lo, "harmonic_sum_sweep: empty range");
  std::vector<HarmonicSumBounds> out;
  out.reserve(static_cast<std::size_t>(N_hi - N_lo + 1));
  double sum = 0.0;
  for (std::int64_t k = 0; k <= N_hi; ++k) {
    sum += std::pow(static_cast<double>(k + 1), -alpha);
    if (k >= N_lo) out.push_back(sandwich(alpha, k, sum));
  }
  return out;
}

}  // namespace airig
