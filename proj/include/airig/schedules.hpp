#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace airig {

/// Stepsize gamma_k = gamma0 / sqrt(1 + k), regularization
/// eta_k = eta0 / (1 + k)^b, averaging weights gamma_k^r.
struct ScheduleParams {
  double gamma0 = 1.0;
  double eta0 = 1.0;
  double b = 0.25;
  double r = 0.0;

  /// Throws ContractViolation unless gamma0, eta0 > 0, 0 < b < 0.5, 0 <= r < 1.
  void validate() const;

  nlohmann::json to_json() const;
  static ScheduleParams from_json(const nlohmann::json& j);
};

double gamma(const ScheduleParams& params, std::int64_t k);
double eta(const ScheduleParams& params, std::int64_t k);

struct HarmonicSumBounds {
  double lower = 0.0;
  double upper = 0.0;
  double sum = 0.0;
};

/// Smallest N with N >= 2^(1/(1-alpha)) - 1.
std::int64_t harmonic_sum_threshold(double alpha);

/// Sandwich (N+1)^(1-a) / (2(1-a)) <= sum_{k=0}^{N} (k+1)^(-a) <= (N+1)^(1-a) / (1-a).
HarmonicSumBounds harmonic_sum_bounds(double alpha, std::int64_t N);

/// harmonic_sum_bounds for every N in [N_lo, N_hi], accumulating the sum
/// once instead of per entry.
std::vector<HarmonicSumBounds> harmonic_sum_sweep(double alpha, std::int64_t N_lo, std::int64_t N_hi);

}  // namespace airig
