#pragma once

#include "airig/common.hpp"
#include "airig/problem.hpp"
#include "airig/schedules.hpp"
#include "airig/trace.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace airig {

/// Running weighted average xbar_k = sum_t gamma_t^r x_t / S_k with
/// S_k = sum_t gamma_t^r.
struct AveragingState {
  double S = 0.0;
  Vector xbar;

  static AveragingState start(const Vector& x0, double gamma0, double r);
};

AveragingState update_average(const AveragingState& state, const Vector& x_next, double gamma_next,
                              double r);

/// One cyclic pass over the agents:
///   x <- P_X(x - gamma (dphi_i(x) + eta df_i(x)))  for i = 1..m.
/// When `drift` is given it receives ||x_k - x_{k,i}|| for i = 1..m+1.
Vector cycle(const ProblemSpec& problem, const Vector& x_k, double gamma_k, double eta_k,
             std::vector<double>* drift = nullptr);

struct RunOptions {
  std::optional<double> budget_s;
  std::int64_t eval_every = 1;
  bool log_iterates = false;
  bool log_drift = false;
};

/// Averaged iteratively regularized incremental gradient method.
/// Runs N outer iterations with gamma_k, eta_k from `params`, tracing
/// f and phi at xbar_{k+1} and x_{k+1} every `eval_every` iterations (and
/// always at the final one).
RunHistory run_airig(const ProblemSpec& problem, const ScheduleParams& params, const Vector& x0,
                     std::int64_t N, const RunOptions& options = {});

/// Smallest N for which the rate bounds below apply: N >= 2^(2/(1-r)) - 1.
std::int64_t rate_bound_min_iterations(double r);

/// Right-hand side of the suboptimality rate bound for xbar_N:
/// (2-r) / (gamma0^r (N+1)^(0.5-b)) * (2M^2 / (eta0 gamma0^(1-r))
///   + (m+1) gamma0^(1+r) (C + eta0 C_f)^2 / (2 m eta0 (0.5 - 0.5r + b))).
double suboptimality_bound(const ScheduleParams& params, const BoundEstimates& bounds, Index m,
                           std::int64_t N);

/// Right-hand side of the infeasibility rate bound for xbar_N:
/// (2-r) / (N+1)^b * (2M^2 / gamma0 + 2 M_f eta0 / (1 - 0.5r - b)
///   + (m+1) (C + eta0 C_f)^2 gamma0 / (2 m (0.5 - 0.5r))).
double infeasibility_bound(const ScheduleParams& params, const BoundEstimates& bounds, Index m,
                           std::int64_t N);

}  // namespace airig
