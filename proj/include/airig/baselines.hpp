#pragma once

#include "airig/common.hpp"
#include "airig/problem.hpp"
#include "airig/qp.hpp"
#include "airig/trace.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace airig {

/// Last seen gradient of each agent and their running sum.
class GradientTable {
 public:
  GradientTable() = default;
  GradientTable(Index agents, Index n);

  /// Every entry evaluated at x.
  static GradientTable at(const ProblemSpec& problem, const Vector& x);

  Index agents() const { return static_cast<Index>(grads_.size()); }
  const Vector& grad(Index i) const { return grads_[static_cast<std::size_t>(i)]; }
  const Vector& sum() const { return sum_; }
  bool filled(Index i) const { return filled_[static_cast<std::size_t>(i)] != 0; }

  /// Replaces entry i and updates the sum incrementally; the sum is rebuilt
  /// from scratch every kResumEvery refreshes.
  void refresh(Index i, const Vector& g);
  void resum();
  /// ||sum - sum_i grads_i||_inf
  double consistency_error() const;

  static constexpr std::int64_t kResumEvery = 1000;

 private:
  std::vector<Vector> grads_;
  std::vector<char> filled_;
  Vector sum_;
  std::int64_t refreshes_ = 0;
};

enum class BaselineKind { ProjIG, ProxIAG, SAGA };

/// "proj_ig", "prox_iag", "saga"
std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

/// One cycle of x <- P(x - gamma grad f_i(x)), i = 1..m, projecting after
/// every agent.
Vector step_projected_ig(const ProblemSpec& problem, const Vector& x_k, double gamma_k,
                         PolyhedronProjector& projector);

/// Refreshes agent `agent` at x_k, then x <- P(x_k - (gamma/m) sum).
Vector step_prox_iag(const ProblemSpec& problem, GradientTable& table, const Vector& x_k,
                     double gamma, PolyhedronProjector& projector, Index agent);

/// grad f_j(x) - grads[j] + sum / m
Vector saga_direction(const ProblemSpec& problem, const GradientTable& table, const Vector& x, Index j);

/// Draws j uniformly, steps along saga_direction, then refreshes entry j.
Vector step_saga(const ProblemSpec& problem, GradientTable& table, const Vector& x_k, double gamma,
                 PolyhedronProjector& projector, std::mt19937_64& rng);

/// gamma_k = gamma0 / sqrt(1 + k), or gamma0 throughout when constant.
struct BaselineStepsize {
  double gamma0 = 1.0;
  bool constant = false;

  double at(std::int64_t k) const;
};

/// The stepsize each kind uses by default: diminishing for ProjIG,
/// constant for ProxIAG and SAGA.
BaselineStepsize default_stepsize(BaselineKind kind, double gamma0);

struct BaselineOptions {
  std::optional<double> budget_s;
  std::int64_t eval_every = 1;
  double projection_tol = kDefaultQpTol;
  std::uint64_t seed = 0;
  bool log_iterates = false;
};

/// Runs N outer iterations, each touching every agent once in expectation
/// (m agent updates). f_bar/phi_bar are taken at the reported iterate (the
/// uniform average for ProjIG and SAGA, the last iterate for ProxIAG);
/// eta_k is recorded as 0.
RunHistory run_baseline(BaselineKind kind, const ProblemSpec& problem, const PolyhedralSet& feasible,
                        const BaselineStepsize& stepsize, const Vector& x0, std::int64_t N,
                        const BaselineOptions& options = {});

/// Largest ||grad f_i(x) - grad f_i(y)|| / ||x - y|| over sampled pairs in X.
double estimate_gradient_lipschitz(const ProblemSpec& problem, std::size_t pairs, std::uint64_t seed);

struct StepsizeTuning {
  double gamma = 0.0;
  std::vector<double> grid;
  std::vector<double> pilot_objective;  // NaN for failed pilots
};

/// Picks gamma from {1, 0.1, 0.01} / L_est by the objective at the reported
/// iterate after `pilot_iterations` outer iterations.
StepsizeTuning tune_constant_stepsize(BaselineKind kind, const ProblemSpec& problem,
                                      const PolyhedralSet& feasible, const Vector& x0,
                                      std::int64_t pilot_iterations, std::uint64_t seed);

}  // namespace airig
