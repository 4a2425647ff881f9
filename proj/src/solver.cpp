#include "airig/solver.hpp"

#include <chrono>
#include <cmath>
#include <exception>

namespace airig {
namespace {

struct CycleWorkspace {
  Vector grad_phi;
  Vector grad_f;
  Vector scratch;
};

// In-place sweep x_{k,1} -> x_{k,m+1}. `drift` (optional) collects
// ||x_k - x_{k,i}|| for i = 1..m+1.
void sweep(const ProblemSpec& problem, Vector& x, double gamma_k, double eta_k, CycleWorkspace& ws,
           std::vector<double>* drift) {
  const Index m = problem.agents();
  Vector start;
  if (drift) {
    start = x;
    drift->assign(1, 0.0);
  }
  for (Index i = 0; i < m; ++i) {
    const AgentBlock& blk = problem.block(i);
    try {
      subgrad_phi_agent_into(blk, x, problem.nonneg(), m, problem.phi_mode(), ws.grad_phi,
                             ws.scratch);
      blk.f->evaluate(x, ws.grad_f);
    } catch (const ContractViolation&) {
      throw;
    } catch (const std::exception& e) {
      throw OracleError(static_cast<std::size_t>(i), e.what());
    }
    ws.grad_phi.noalias() += eta_k * ws.grad_f;
    x.noalias() -= gamma_k * ws.grad_phi;
    project_box_inplace(problem.box(), x);
    if (drift) drift->push_back((x - start).norm());
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

AveragingState AveragingState::start(const Vector& x0, double gamma0, double r) {
  require(gamma0 > 0.0, "averaging: gamma0 must be positive");
  return {std::pow(gamma0, r), x0};
}

AveragingState update_average(const AveragingState& state, const Vector& x_next, double gamma_next,
                              double r) {
  require(state.S > 0.0, "update_average: S must be positive");
  require(gamma_next > 0.0, "update_average: gamma must be positive");
  require(x_next.size() == state.xbar.size(), "update_average: dimension mismatch");
  const double w = std::pow(gamma_next, r);
  AveragingState next;
  next.S = state.S + w;
  next.xbar = (state.S * state.xbar + w * x_next) / next.S;
  return next;
}

Vector cycle(const ProblemSpec& problem, const Vector& x_k, double gamma_k, double eta_k,
             std::vector<double>* drift) {
  require_dim(x_k, problem.dimension(), "cycle");
  require(gamma_k > 0.0 && eta_k > 0.0, "cycle: gamma and eta must be positive");
  require(problem.box().contains(x_k), "cycle: x_k must lie in X");
  CycleWorkspace ws;
  Vector x = x_k;
  sweep(problem, x, gamma_k, eta_k, ws, drift);
  return x;
}

RunHistory run_airig(const ProblemSpec& problem, const ScheduleParams& params, const Vector& x0,
                     std::int64_t N, const RunOptions& options) {
  params.validate();
  require(N >= 1, "run_airig: N must be >= 1");
  require(options.eval_every >= 1, "run_airig: eval_every must be >= 1");
  require_dim(x0, problem.dimension(), "run_airig x0");

  const auto t0 = Clock::now();
  RunHistory hist;
  hist.solver = "airig";
  hist.params = params;
  hist.N = N;

  Vector x = x0;
  if (!problem.box().contains(x)) {
    project_box_inplace(problem.box(), x);
    hist.x0_projected = true;
  }

  const double r = params.r;
  double S = std::pow(gamma(params, 0), r);
  Vector xbar = x;
  if (options.log_iterates) {
    hist.iterates.push_back(x);
    hist.averages.push_back(xbar);
  }

  CycleWorkspace ws;
  std::vector<double> drift;
  for (std::int64_t k = 0; k < N; ++k) {
    if (options.budget_s && seconds_since(t0) >= *options.budget_s) {
      hist.truncated = true;
      break;
    }
    const double g = gamma(params, k);
    const double e = eta(params, k);
    sweep(problem, x, g, e, ws, options.log_drift ? &drift : nullptr);
    if (options.log_drift) hist.drift.push_back(drift);

    const double w = std::pow(gamma(params, k + 1), r);
    const double S_next = S + w;
    xbar = (S * xbar + w * x) / S_next;
    S = S_next;
    hist.completed = k + 1;

    if (options.log_iterates) {
      hist.iterates.push_back(x);
      hist.averages.push_back(xbar);
    }
    if ((k + 1) % options.eval_every == 0 || k + 1 == N) {
      IterRecord rec;
      rec.k = k;
      rec.f_bar = problem.objective(xbar);
      rec.phi_bar = eval_phi_total(problem, xbar);
      rec.f_last = problem.objective(x);
      rec.phi_last = eval_phi_total(problem, x);
      rec.gamma_k = g;
      rec.eta_k = e;
      rec.elapsed = seconds_since(t0);
      hist.records.push_back(rec);
    }
  }
  hist.final_xbar = xbar;
  hist.final_x = x;
  return hist;
}

std::int64_t rate_bound_min_iterations(double r) {
  require(r >= 0.0 && r < 1.0, "r must lie in [0, 1)");
  return static_cast<std::int64_t>(std::ceil(std::exp2(2.0 / (1.0 - r)) - 1.0 - 1e-9));
}

double suboptimality_bound(const ScheduleParams& p, const BoundEstimates& c, Index m,
                           std::int64_t N) {
  p.validate();
  require(N >= 0 && m >= 1, "suboptimality_bound: bad N or m");
  const double md = static_cast<double>(m);
  const double lead = (2.0 - p.r) / (std::pow(p.gamma0, p.r) * std::pow(N + 1.0, 0.5 - p.b));
  const double spread = c.C + p.eta0 * c.C_f;
  const double t1 = 2.0 * c.M * c.M / (p.eta0 * std::pow(p.gamma0, 1.0 - p.r));
  const double t2 = (md + 1.0) * std::pow(p.gamma0, 1.0 + p.r) * spread * spread /
                    (2.0 * md * p.eta0 * (0.5 - 0.5 * p.r + p.b));
  return lead * (t1 + t2);
}

double infeasibility_bound(const ScheduleParams& p, const BoundEstimates& c, Index m,
                           std::int64_t N) {
  p.validate();
  require(N >= 0 && m >= 1, "infeasibility_bound: bad N or m");
  const double md = static_cast<double>(m);
  const double lead = (2.0 - p.r) / std::pow(N + 1.0, p.b);
  const double spread = c.C + p.eta0 * c.C_f;
  const double t1 = 2.0 * c.M * c.M / p.gamma0;
  const double t2 = 2.0 * c.M_f * p.eta0 / (1.0 - 0.5 * p.r - p.b);
  const double t3 = (md + 1.0) * spread * spread * p.gamma0 / (2.0 * md * (0.5 - 0.5 * p.r));
  return lead * (t1 + t2 + t3);
}

}  // namespace airig
