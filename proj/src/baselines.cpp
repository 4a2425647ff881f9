#include "airig/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace airig {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void agent_gradient(const ProblemSpec& problem, Index i, const Vector& x, Vector& g) {
  try {
    problem.block(i).f->evaluate(x, g);
  } catch (const ContractViolation&) {
    throw;
  } catch (const std::exception& e) {
    throw OracleError(static_cast<std::size_t>(i), e.what());
  }
}

}  // namespace

GradientTable::GradientTable(Index agents, Index n)
    : grads_(static_cast<std::size_t>(agents), Vector::Zero(n)),
      filled_(static_cast<std::size_t>(agents), 0),
      sum_(Vector::Zero(n)) {
  require(agents >= 1, "gradient table needs at least one agent");
}

GradientTable GradientTable::at(const ProblemSpec& problem, const Vector& x) {
  GradientTable t(problem.agents(), problem.dimension());
  Vector g;
  for (Index i = 0; i < problem.agents(); ++i) {
    agent_gradient(problem, i, x, g);
    t.refresh(i, g);
  }
  t.resum();
  return t;
}

void GradientTable::refresh(Index i, const Vector& g) {
  require(i >= 0 && i < agents(), "gradient table: agent index out of range");
  Vector& slot = grads_[static_cast<std::size_t>(i)];
  require_dim(g, slot.size(), "gradient table refresh");
  sum_ += g - slot;
  slot = g;
  filled_[static_cast<std::size_t>(i)] = 1;
  if (++refreshes_ % kResumEvery == 0) resum();
}

void GradientTable::resum() {
  sum_.setZero();
  for (const auto& g : grads_) sum_ += g;
}

double GradientTable::consistency_error() const {
  Vector s = Vector::Zero(sum_.size());
  for (const auto& g : grads_) s += g;
  return s.size() ? (s - sum_).cwiseAbs().maxCoeff() : 0.0;
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::ProjIG: return "proj_ig";
    case BaselineKind::ProxIAG: return "prox_iag";
    case BaselineKind::SAGA: return "saga";
  }
  return "unknown";
}

BaselineKind baseline_from_string(const std::string& name) {
  if (name == "proj_ig") return BaselineKind::ProjIG;
  if (name == "prox_iag") return BaselineKind::ProxIAG;
  if (name == "saga") return BaselineKind::SAGA;
  throw ContractViolation("unknown baseline \"" + name + "\"");
}

Vector step_projected_ig(const ProblemSpec& problem, const Vector& x_k, double gamma_k,
                         PolyhedronProjector& projector) {
  require(gamma_k > 0.0, "step_projected_ig: gamma must be positive");
  require_dim(x_k, problem.dimension(), "step_projected_ig");
  Vector x = x_k;
  Vector g;
  for (Index i = 0; i < problem.agents(); ++i) {
    agent_gradient(problem, i, x, g);
    x = projector.project(x - gamma_k * g).x;
  }
  return x;
}

Vector step_prox_iag(const ProblemSpec& problem, GradientTable& table, const Vector& x_k, double gamma,
                     PolyhedronProjector& projector, Index agent) {
  require(gamma > 0.0, "step_prox_iag: gamma must be positive");
  require(table.agents() == problem.agents(), "step_prox_iag: table size mismatch");
  require_dim(x_k, problem.dimension(), "step_prox_iag");
  Vector g;
  agent_gradient(problem, agent, x_k, g);
  table.refresh(agent, g);
  const double md = static_cast<double>(problem.agents());
  return projector.project(x_k - (gamma / md) * table.sum()).x;
}

Vector saga_direction(const ProblemSpec& problem, const GradientTable& table, const Vector& x, Index j) {
  Vector g;
  agent_gradient(problem, j, x, g);
  return g - table.grad(j) + table.sum() / static_cast<double>(problem.agents());
}

Vector step_saga(const ProblemSpec& problem, GradientTable& table, const Vector& x_k, double gamma,
                 PolyhedronProjector& projector, std::mt19937_64& rng) {
  require(gamma > 0.0, "step_saga: gamma must be positive");
  require(table.agents() == problem.agents(), "step_saga: table size mismatch");
  require_dim(x_k, problem.dimension(), "step_saga");
  std::uniform_int_distribution<Index> pick(0, problem.agents() - 1);
  const Index j = pick(rng);
  Vector g;
  agent_gradient(problem, j, x_k, g);
  const Vector dir = g - table.grad(j) + table.sum() / static_cast<double>(problem.agents());
  Vector x = projector.project(x_k - gamma * dir).x;
  table.refresh(j, g);
  return x;
}

double BaselineStepsize::at(std::int64_t k) const {
  return constant ? gamma0 : gamma0 / std::sqrt(1.0 + static_cast<double>(k));
}

BaselineStepsize default_stepsize(BaselineKind kind, double gamma0) {
  return {gamma0, kind != BaselineKind::ProjIG};
}

RunHistory run_baseline(BaselineKind kind, const ProblemSpec& problem, const PolyhedralSet& feasible,
                        const BaselineStepsize& stepsize, const Vector& x0, std::int64_t N,
                        const BaselineOptions& options) {
  require(N >= 1, "run_baseline: N must be >= 1");
  require(stepsize.gamma0 > 0.0, "run_baseline: gamma0 must be positive");
  require(options.eval_every >= 1, "run_baseline: eval_every must be >= 1");
  require_dim(x0, problem.dimension(), "run_baseline x0");
  require(feasible.dimension() == problem.dimension(), "run_baseline: polyhedron dimension mismatch");

  const auto t0 = Clock::now();
  RunHistory hist;
  hist.solver = to_string(kind);
  hist.N = N;
  hist.params.gamma0 = stepsize.gamma0;

  PolyhedronProjector projector(feasible, options.projection_tol);
  Vector x = projector.project(x0).x;
  hist.x0_projected = true;
  const bool averaged = kind != BaselineKind::ProxIAG;
  Vector xbar = x;
  if (options.log_iterates) {
    hist.iterates.push_back(x);
    hist.averages.push_back(xbar);
  }

  const Index m = problem.agents();
  GradientTable table = kind == BaselineKind::SAGA ? GradientTable::at(problem, x)
                                                   : GradientTable(m, problem.dimension());
  std::mt19937_64 rng(options.seed);

  for (std::int64_t k = 0; k < N; ++k) {
    if (options.budget_s && seconds_since(t0) >= *options.budget_s) {
      hist.truncated = true;
      break;
    }
    const double g = stepsize.at(k);
    switch (kind) {
      case BaselineKind::ProjIG:
        x = step_projected_ig(problem, x, g, projector);
        break;
      case BaselineKind::ProxIAG:
        for (Index i = 0; i < m; ++i) x = step_prox_iag(problem, table, x, g, projector, i);
        break;
      case BaselineKind::SAGA:
        for (Index i = 0; i < m; ++i) x = step_saga(problem, table, x, g, projector, rng);
        break;
    }
    if (averaged) {
      const double t = static_cast<double>(k + 2);
      xbar += (x - xbar) / t;
    } else {
      xbar = x;
    }
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
      rec.eta_k = 0.0;
      rec.elapsed = seconds_since(t0);
      hist.records.push_back(rec);
    }
  }
  hist.final_xbar = xbar;
  hist.final_x = x;
  return hist;
}

double estimate_gradient_lipschitz(const ProblemSpec& problem, std::size_t pairs, std::uint64_t seed) {
  require(pairs >= 1, "estimate_gradient_lipschitz: pairs must be >= 1");
  const BoxSet& box = problem.box();
  const Index n = problem.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&] {
    Vector x(n);
    for (Index j = 0; j < n; ++j) x[j] = box.lower()[j] + unit(rng) * (box.upper()[j] - box.lower()[j]);
    return x;
  };
  double L = 0.0;
  Vector gx, gy;
  for (std::size_t p = 0; p < pairs; ++p) {
    const Vector x = sample();
    const Vector y = sample();
    const double dist = (x - y).norm();
    if (!(dist > 0.0)) continue;
    for (Index i = 0; i < problem.agents(); ++i) {
      agent_gradient(problem, i, x, gx);
      agent_gradient(problem, i, y, gy);
      L = std::max(L, (gx - gy).norm() / dist);
    }
  }
  return std::max(L, kBoundFloor);
}

StepsizeTuning tune_constant_stepsize(BaselineKind kind, const ProblemSpec& problem,
                                      const PolyhedralSet& feasible, const Vector& x0,
                                      std::int64_t pilot_iterations, std::uint64_t seed) {
  require(pilot_iterations >= 1, "tune_constant_stepsize: pilot_iterations must be >= 1");
  const double L = estimate_gradient_lipschitz(problem, 32, seed);
  StepsizeTuning out;
  out.grid = {1.0 / L, 0.1 / L, 0.01 / L};
  double best = std::numeric_limits<double>::infinity();
  BaselineOptions opts;
  opts.seed = seed;
  opts.eval_every = pilot_iterations;
  for (double gamma : out.grid) {
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      const RunHistory h = run_baseline(kind, problem, feasible, {gamma, true}, x0, pilot_iterations, opts);
      value = h.records.back().f_bar;
    } catch (const NonconvergenceError&) {
    } catch (const OracleError&) {
    }
    out.pilot_objective.push_back(value);
    if (std::isfinite(value) && value < best) {
      best = value;
      out.gamma = gamma;
    }
  }
  require(out.gamma > 0.0, "tune_constant_stepsize: every pilot run failed");
  return out;
}

}  // namespace airig
