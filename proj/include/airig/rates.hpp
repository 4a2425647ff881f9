#pragma once

#include "airig/problem.hpp"
#include "airig/schedules.hpp"
#include "airig/trace.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace airig {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y ~ a + slope x. A constant y gives slope 0, r2 1.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Constants needed to evaluate the rate bounds on a trace.
struct RateBoundContext {
  BoundEstimates bounds;
  ScheduleParams params;
  Index m = 1;
};

struct RateReport {
  double slope_f = 0.0;
  double slope_phi = 0.0;
  std::int64_t k_lo = 0;
  std::int64_t k_hi = 0;
  double r2_f = 0.0;
  double r2_phi = 0.0;
  std::size_t excluded_f = 0;    // window records with f_bar - f* <= kFitFloor
  std::size_t excluded_phi = 0;  // window records with phi_bar <= kFitFloor
  std::optional<bool> bound_check_f;
  std::optional<bool> bound_check_phi;

  nlohmann::json to_json() const;
};

inline constexpr double kFitFloor = 1e-14;
inline constexpr std::size_t kMinFitRecords = 50;

/// Fits log(metric) against log(k + 1) over the last window_fraction of the
/// records, for metric = f_bar - f_star and metric = phi_bar. Records at or
/// below kFitFloor are skipped and counted. With a rate-bound context, every
/// window record whose iteration count k + 1 is in the bounds' range is
/// checked against both right-hand sides.
RateReport fit_rates(const std::vector<IterRecord>& records, double f_star, double window_fraction = 0.5,
                     const std::optional<RateBoundContext>& context = std::nullopt);

}  // namespace airig
