#include "airig/suite.hpp"

#include "airig/baselines.hpp"
#include "airig/json_io.hpp"
#include "airig/rates.hpp"
#include "airig/solver.hpp"
#include "airig/svm.hpp"
#include "airig/trace.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

namespace airig {
namespace {

using json = nlohmann::json;

const std::set<std::string> kSolvers = {"airig", "proj_ig", "prox_iag", "saga"};

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ContractViolation(where + ": unknown key \"" + key + "\"");
  }
}

MarginAggregation h_mode_from_string(const std::string& s) {
  if (s == "max") return MarginAggregation::Max;
  if (s == "sum") return MarginAggregation::SumOfHinges;
  throw ContractViolation("svm.h_mode must be \"max\" or \"sum\", got \"" + s + "\"");
}

std::string svm_tag(Index samples, Index features) {
  return "svm_N" + std::to_string(samples) + "_n" + std::to_string(features);
}

struct RunJob {
  std::size_t problem = 0;
  std::string solver;
};

struct RunOutcome {
  bool ok = false;
  std::string error;
  json entry;
  std::string trace_path;
};

}  // namespace

SuiteConfig SuiteConfig::from_json(const json& j) {
  try {
    require(j.is_object(), "suite config must be a JSON object");
    reject_unknown(j,
                   {"problem", "svm", "grid", "solvers", "solver", "gamma0", "eta0", "b", "r", "N", "budget_s",
                    "eval_every", "seed", "output_dir", "workers", "f_star", "window_fraction",
                    "pilot_iterations", "bound_samples", "x0"},
                   "suite config");
    SuiteConfig c;
    read_opt(j, "problem", c.problem);
    if (j.contains("svm")) {
      const json& s = j.at("svm");
      reject_unknown(s,
                     {"samples", "features", "agents", "lambda", "separation", "flip_prob", "seed", "box_radius",
                      "h_mode"},
                     "svm config");
      read_opt(s, "samples", c.svm.samples);
      read_opt(s, "features", c.svm.features);
      read_opt(s, "agents", c.svm.agents);
      read_opt(s, "lambda", c.svm.lambda);
      read_opt(s, "separation", c.svm.separation);
      read_opt(s, "flip_prob", c.svm.flip_prob);
      read_opt(s, "seed", c.svm.seed);
      if (s.contains("box_radius") && !s.at("box_radius").is_null()) c.svm.box_radius = s.at("box_radius").get<double>();
      if (s.contains("h_mode")) c.svm.h_mode = h_mode_from_string(s.at("h_mode").get<std::string>());
    }
    if (j.contains("grid") && !j.at("grid").is_null()) {
      const json& g = j.at("grid");
      if (g.is_string()) {
        require(g.get<std::string>() == "full", "grid must be \"full\" or a list of [N, n] pairs");
        c.grid = SvmBenchmarkPreset::grid();
      } else {
        for (const auto& cell : g) {
          require(cell.is_array() && cell.size() == 2, "grid entries must be [N, n] pairs");
          c.grid.emplace_back(cell[0].get<Index>(), cell[1].get<Index>());
        }
      }
    }
    require(!(j.contains("solvers") && j.contains("solver")), "give either \"solvers\" or \"solver\", not both");
    if (j.contains("solvers")) c.solvers = j.at("solvers").get<std::vector<std::string>>();
    if (j.contains("solver")) c.solvers = {j.at("solver").get<std::string>()};
    read_opt(j, "gamma0", c.params.gamma0);
    read_opt(j, "eta0", c.params.eta0);
    read_opt(j, "b", c.params.b);
    read_opt(j, "r", c.params.r);
    read_opt(j, "N", c.iterations);
    if (j.contains("budget_s") && !j.at("budget_s").is_null()) c.budget_s = j.at("budget_s").get<double>();
    read_opt(j, "eval_every", c.eval_every);
    read_opt(j, "seed", c.seed);
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "workers", c.workers);
    if (j.contains("f_star") && !j.at("f_star").is_null()) c.f_star = j.at("f_star").get<double>();
    read_opt(j, "window_fraction", c.window_fraction);
    read_opt(j, "pilot_iterations", c.pilot_iterations);
    read_opt(j, "bound_samples", c.bound_samples);
    if (j.contains("x0")) require(j.at("x0") == "zeros", "x0: only \"zeros\" is supported");
    return c;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("suite config: ") + e.what());
  }
}

json SuiteConfig::to_json() const {
  json grid_json = json::array();
  for (const auto& [samples, features] : grid) grid_json.push_back({samples, features});
  return {{"problem", problem},
          {"svm",
           {{"samples", svm.samples},
            {"features", svm.features},
            {"agents", svm.agents},
            {"lambda", svm.lambda},
            {"separation", svm.separation},
            {"flip_prob", svm.flip_prob},
            {"seed", svm.seed},
            {"box_radius", svm.box_radius ? json(*svm.box_radius) : json(nullptr)},
            {"h_mode", svm.h_mode == MarginAggregation::Max ? "max" : "sum"}}},
          {"grid", grid_json},
          {"solvers", solvers},
          {"gamma0", params.gamma0},
          {"eta0", params.eta0},
          {"b", params.b},
          {"r", params.r},
          {"N", iterations},
          {"budget_s", budget_s ? json(*budget_s) : json(nullptr)},
          {"eval_every", eval_every},
          {"seed", seed},
          {"output_dir", output_dir},
          {"workers", workers},
          {"f_star", f_star ? json(*f_star) : json(nullptr)},
          {"window_fraction", window_fraction},
          {"pilot_iterations", pilot_iterations},
          {"bound_samples", bound_samples},
          {"x0", "zeros"}};
}

void SuiteConfig::validate() const {
  if (solvers.empty()) throw ContractViolation("no solvers");
  for (const auto& s : solvers) {
    if (!kSolvers.count(s)) throw ContractViolation("unknown solver \"" + s + "\"");
  }
  params.validate();
  require(iterations >= 1, "N must be >= 1");
  require(!budget_s || *budget_s > 0.0, "budget_s must be positive");
  require(eval_every >= 1, "eval_every must be >= 1");
  require(workers >= 1, "workers must be >= 1");
  require(window_fraction > 0.0 && window_fraction <= 1.0, "window_fraction must lie in (0, 1]");
  require(pilot_iterations >= 1, "pilot_iterations must be >= 1");
  require(bound_samples >= 1, "bound_samples must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
  if (problem == kSvmPreset) {
    require(svm.samples >= 2 && svm.features >= 1 && svm.agents >= 1, "svm: bad shape");
    require(svm.lambda > 0.0, "svm.lambda must be positive");
    for (const auto& [samples, features] : grid) require(samples >= 2 && features >= 1, "grid: bad cell");
  }
}

void apply_environment(SuiteConfig& config) {
  const char* env = std::getenv(kOutputDirEnv);
  if (env && *env) config.output_dir = env;
}

namespace {

SuiteProblem prepare_svm_cell(const SuiteConfig& config, Index samples, Index features) {
  const SvmConfig& s = config.svm;
  const SvmDataset data = generate_data(samples, features, s.separation, s.flip_prob, s.seed);
  SvmInstance inst = build_instance(data, s.lambda, s.agents, s.box_radius, s.h_mode);
  SuiteProblem p;
  p.tag = svm_tag(samples, features);
  p.polyhedron = inst.polyhedron;
  if (config.f_star) {
    p.f_star = config.f_star;
    p.f_star_source = "config";
  } else {
    const ReferenceOptimum ref = reference_optimum(inst);
    validate_box_interior(inst, ref.x);
    p.f_star = ref.f;
    p.f_star_source = "reference";
  }
  p.problem = std::move(inst.problem);
  return p;
}

SuiteProblem prepare_file(const SuiteConfig& config) {
  const json j = json_io::read_file(config.problem);
  SuiteProblem p;
  p.tag = std::filesystem::path(config.problem).stem().string();
  if (j.contains("problem")) {
    p.problem = problem_from_json(j.at("problem"));
    if (j.contains("polyhedron")) p.polyhedron = PolyhedralSet::from_json(j.at("polyhedron"));
  } else {
    p.problem = problem_from_json(j);
  }
  if (config.f_star) {
    p.f_star = config.f_star;
    p.f_star_source = "config";
  } else if (j.contains("f_star")) {
    p.f_star = j.at("f_star").get<double>();
    p.f_star_source = "file";
  } else {
    p.f_star_source = "none";
  }
  return p;
}

std::vector<std::pair<Index, Index>> cells(const SuiteConfig& config) {
  if (!config.grid.empty()) return config.grid;
  return {{config.svm.samples, config.svm.features}};
}

RunOutcome execute(const SuiteConfig& config, const SuiteProblem& p, const BoundEstimates& bounds,
                   const std::string& solver) {
  RunOutcome out;
  const std::filesystem::path trace_path =
      std::filesystem::path(config.output_dir) / (p.tag + "__" + solver + ".csv");
  try {
    const Vector x0 = Vector::Zero(p.problem.dimension());
    RunHistory hist;
    json stepsize;
    if (solver == "airig") {
      RunOptions opts;
      opts.budget_s = config.budget_s;
      opts.eval_every = config.eval_every;
      hist = run_airig(p.problem, config.params, x0, config.iterations, opts);
      stepsize = config.params.to_json();
    } else {
      if (!p.polyhedron) throw ContractViolation("baseline " + solver + " needs a polyhedron in the problem file");
      const BaselineKind kind = baseline_from_string(solver);
      BaselineStepsize step = default_stepsize(kind, config.params.gamma0);
      stepsize = {{"schedule", step.constant ? "constant" : "diminishing"}};
      if (step.constant) {
        const StepsizeTuning tune =
            tune_constant_stepsize(kind, p.problem, *p.polyhedron, x0, config.pilot_iterations, config.seed);
        step.gamma0 = tune.gamma;
        json pilots = json::array();
        for (double v : tune.pilot_objective) pilots.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        stepsize["grid"] = tune.grid;
        stepsize["pilot_objective"] = pilots;
      }
      stepsize["gamma0"] = step.gamma0;
      BaselineOptions opts;
      opts.budget_s = config.budget_s;
      opts.eval_every = config.eval_every;
      opts.seed = config.seed;
      hist = run_baseline(kind, p.problem, *p.polyhedron, step, x0, config.iterations, opts);
    }
    json_io::write_file_atomic(trace_path.string(), trace_csv(hist.records));

    json rate = nullptr;
    json rate_error = nullptr;
    if (p.f_star) {
      std::optional<RateBoundContext> ctx;
      if (solver == "airig") ctx = RateBoundContext{bounds, config.params, p.problem.agents()};
      try {
        rate = fit_rates(hist.records, *p.f_star, config.window_fraction, ctx).to_json();
      } catch (const ContractViolation& e) {
        rate_error = e.what();
      }
    } else {
      rate_error = "no f_star for this problem";
    }
    json final_rec = nullptr;
    if (!hist.records.empty()) {
      const IterRecord& r = hist.records.back();
      final_rec = {{"k", r.k},           {"f_bar", r.f_bar},     {"phi_bar", r.phi_bar},
                   {"f_last", r.f_last}, {"phi_last", r.phi_last}, {"elapsed_s", r.elapsed}};
    }
    out.entry = {{"tag", p.tag},
                 {"solver", solver},
                 {"trace", trace_path.filename().string()},
                 {"N", hist.N},
                 {"completed", hist.completed},
                 {"truncated", hist.truncated},
                 {"records", hist.records.size()},
                 {"stepsize", stepsize},
                 {"final", final_rec},
                 {"rate", rate},
                 {"rate_error", rate_error}};
    out.trace_path = trace_path.string();
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::vector<SuiteProblem> prepare_problems(const SuiteConfig& config) {
  config.validate();
  std::vector<SuiteProblem> out;
  if (config.problem == kSvmPreset) {
    for (const auto& [samples, features] : cells(config)) out.push_back(prepare_svm_cell(config, samples, features));
  } else {
    out.push_back(prepare_file(config));
  }
  return out;
}

SuiteResult run_suite(const SuiteConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.output_dir);

  json errors = json::array();
  std::vector<SuiteProblem> problems;
  std::vector<BoundEstimates> bounds;
  json problems_json = json::array();
  auto record_problem = [&](SuiteProblem p) {
    const BoundEstimates est = estimate_bounds(p.problem, config.bound_samples, config.seed);
    problems_json.push_back({{"tag", p.tag},
                             {"n", p.problem.dimension()},
                             {"m", p.problem.agents()},
                             {"f_star", p.f_star ? json(*p.f_star) : json(nullptr)},
                             {"f_star_source", p.f_star_source},
                             {"bounds", est.to_json()},
                             {"rate_bound_min_N", rate_bound_min_iterations(config.params.r)}});
    bounds.push_back(est);
    problems.push_back(std::move(p));
  };
  if (config.problem == kSvmPreset) {
    for (const auto& [samples, features] : cells(config)) {
      try {
        record_problem(prepare_svm_cell(config, samples, features));
      } catch (const std::exception& e) {
        errors.push_back({{"tag", svm_tag(samples, features)}, {"solver", nullptr}, {"message", e.what()}});
      }
    }
  } else {
    try {
      record_problem(prepare_file(config));
    } catch (const std::exception& e) {
      errors.push_back({{"tag", config.problem}, {"solver", nullptr}, {"message", e.what()}});
    }
  }

  std::vector<RunJob> jobs;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    for (const auto& s : config.solvers) jobs.push_back({i, s});
  }
  std::vector<RunOutcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < jobs.size(); idx = next++) {
      const RunJob& job = jobs[idx];
      outcomes[idx] = execute(config, problems[job.problem], bounds[job.problem], job.solver);
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SuiteResult result;
  json runs = json::array();
  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    const RunOutcome& o = outcomes[idx];
    if (o.ok) {
      runs.push_back(o.entry);
      result.trace_files.push_back(o.trace_path);
    } else {
      errors.push_back({{"tag", problems[jobs[idx].problem].tag}, {"solver", jobs[idx].solver}, {"message", o.error}});
    }
  }
  result.summary = {{"config", config.to_json()}, {"problems", problems_json}, {"runs", runs}, {"errors", errors}};
  json_io::write_file_atomic((std::filesystem::path(config.output_dir) / "summary.json").string(),
                             result.summary.dump(2) + "\n");
  result.exit_code = errors.empty() ? 0 : 1;
  return result;
}

}  // namespace airig
