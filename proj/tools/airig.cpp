// airig: build SVM instances, run solver suites, fit rates, print bounds.

#include "airig/json_io.hpp"
#include "airig/rates.hpp"
#include "airig/solver.hpp"
#include "airig/suite.hpp"
#include "airig/svm.hpp"
#include "airig/trace.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Flags left unset keep the config (or default) value.
struct Overrides {
  std::optional<std::string> problem;
  std::optional<std::string> solvers;
  std::optional<double> gamma0, eta0, b, r, budget_s, f_star, lambda, separation, flip_prob, box_radius;
  std::optional<std::int64_t> iterations, eval_every, samples, features, agents;
  std::optional<std::uint64_t> seed, svm_seed;
  std::optional<std::string> output_dir, h_mode;
  std::optional<int> workers;
  std::optional<bool> full_grid;
};

void add_suite_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--problem", o.problem, std::string("\"") + airig::kSvmPreset + "\" or a problem JSON file");
  cmd->add_option("--solvers", o.solvers, "comma-separated: airig,proj_ig,prox_iag,saga");
  cmd->add_option("--gamma0", o.gamma0);
  cmd->add_option("--eta0", o.eta0);
  cmd->add_option("--b", o.b);
  cmd->add_option("--r", o.r);
  cmd->add_option("-N,--iterations", o.iterations, "outer iterations per run");
  cmd->add_option("--budget", o.budget_s, "wall-clock budget per run, seconds");
  cmd->add_option("--eval-every", o.eval_every);
  cmd->add_option("--seed", o.seed);
  cmd->add_option("--output-dir", o.output_dir);
  cmd->add_option("--workers", o.workers);
  cmd->add_option("--f-star", o.f_star);
  cmd->add_option("--samples", o.samples);
  cmd->add_option("--features", o.features);
  cmd->add_option("--agents", o.agents);
  cmd->add_option("--lambda", o.lambda);
  cmd->add_option("--separation", o.separation);
  cmd->add_option("--flip-prob", o.flip_prob);
  cmd->add_option("--svm-seed", o.svm_seed);
  cmd->add_option("--box-radius", o.box_radius);
  cmd->add_option("--h-mode", o.h_mode, "max or sum");
  cmd->add_flag("--full-grid", o.full_grid, "run every cell of the SVM benchmark grid");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Precedence: flag > environment > config file > default.
airig::SuiteConfig resolve_config(const std::string& path, const Overrides& o) {
  airig::SuiteConfig c = path.empty() ? airig::SuiteConfig{} : airig::SuiteConfig::from_json(airig::json_io::read_file(path));
  airig::apply_environment(c);
  if (o.problem) c.problem = *o.problem;
  if (o.solvers) c.solvers = split_list(*o.solvers);
  if (o.gamma0) c.params.gamma0 = *o.gamma0;
  if (o.eta0) c.params.eta0 = *o.eta0;
  if (o.b) c.params.b = *o.b;
  if (o.r) c.params.r = *o.r;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.budget_s) c.budget_s = *o.budget_s;
  if (o.eval_every) c.eval_every = *o.eval_every;
  if (o.seed) c.seed = *o.seed;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.workers) c.workers = *o.workers;
  if (o.f_star) c.f_star = *o.f_star;
  if (o.samples) c.svm.samples = *o.samples;
  if (o.features) c.svm.features = *o.features;
  if (o.agents) c.svm.agents = *o.agents;
  if (o.lambda) c.svm.lambda = *o.lambda;
  if (o.separation) c.svm.separation = *o.separation;
  if (o.flip_prob) c.svm.flip_prob = *o.flip_prob;
  if (o.svm_seed) c.svm.seed = *o.svm_seed;
  if (o.box_radius) c.svm.box_radius = *o.box_radius;
  if (o.h_mode) {
    if (*o.h_mode == "max") c.svm.h_mode = airig::MarginAggregation::Max;
    else if (*o.h_mode == "sum") c.svm.h_mode = airig::MarginAggregation::SumOfHinges;
    else throw airig::ContractViolation("--h-mode must be max or sum");
  }
  if (o.full_grid && *o.full_grid) c.grid = airig::SvmBenchmarkPreset::grid();
  return c;
}

int cmd_build(const airig::SuiteConfig& c, bool with_reference) {
  fs::create_directories(c.output_dir);
  const auto data = airig::generate_data(c.svm.samples, c.svm.features, c.svm.separation, c.svm.flip_prob, c.svm.seed);
  const auto inst = airig::build_instance(data, c.svm.lambda, c.svm.agents, c.svm.box_radius, c.svm.h_mode);
  const std::string stem = "svm_N" + std::to_string(c.svm.samples) + "_n" + std::to_string(c.svm.features);
  const fs::path dataset = fs::path(c.output_dir) / (stem + ".csv");
  const fs::path instance = fs::path(c.output_dir) / (stem + ".json");
  airig::write_dataset_csv(data, dataset.string());
  json j = inst.to_json();
  if (with_reference) {
    const auto ref = airig::reference_optimum(inst);
    airig::validate_box_interior(inst, ref.x);
    j["f_star"] = ref.f;
    j["x_star"] = airig::json_io::from_vector(ref.x);
  }
  airig::json_io::write_file_atomic(instance.string(), j.dump() + "\n");
  std::cout << dataset.string() << "\n" << instance.string() << "\n";
  return 0;
}

int cmd_run(const airig::SuiteConfig& c) {
  const auto result = airig::run_suite(c);
  for (const auto& f : result.trace_files) std::cout << f << "\n";
  std::cout << (fs::path(c.output_dir) / "summary.json").string() << "\n";
  for (const auto& e : result.summary.at("errors")) {
    std::cerr << "error: " << e.at("tag").get<std::string>();
    if (!e.at("solver").is_null()) std::cerr << "/" << e.at("solver").get<std::string>();
    std::cerr << ": " << e.at("message").get<std::string>() << "\n";
  }
  return result.exit_code;
}

// f_star and rate-bound constants come from --f-star or from a summary.json
// next to the traces.
int cmd_fit(const std::vector<std::string>& traces, std::optional<double> f_star, const std::string& summary_path,
            double window) {
  json summary;
  if (!summary_path.empty()) summary = airig::json_io::read_file(summary_path);
  json out = json::array();
  int status = 0;
  for (const auto& path : traces) {
    json entry = {{"trace", path}};
    try {
      const auto records = airig::read_trace_file(path);
      std::optional<double> fs_value = f_star;
      std::optional<airig::RateBoundContext> ctx;
      const std::string name = fs::path(path).stem().string();
      const auto sep = name.find("__");
      if (!summary.is_null() && sep != std::string::npos) {
        const std::string tag = name.substr(0, sep);
        const std::string solver = name.substr(sep + 2);
        for (const auto& p : summary.at("problems")) {
          if (p.at("tag") != tag) continue;
          if (!fs_value && !p.at("f_star").is_null()) fs_value = p.at("f_star").get<double>();
          if (solver == "airig") {
            const json& cfg = summary.at("config");
            airig::ScheduleParams params{cfg.at("gamma0").get<double>(), cfg.at("eta0").get<double>(),
                                         cfg.at("b").get<double>(), cfg.at("r").get<double>()};
            ctx = airig::RateBoundContext{airig::BoundEstimates::from_json(p.at("bounds")), params,
                                        p.at("m").get<airig::Index>()};
          }
        }
      }
      if (!fs_value) throw airig::ContractViolation("no f_star: pass --f-star or --summary");
      entry["rate"] = airig::fit_rates(records, *fs_value, window, ctx).to_json();
    } catch (const std::exception& e) {
      entry["error"] = e.what();
      status = 1;
    }
    out.push_back(entry);
  }
  std::cout << out.dump(2) << "\n";
  return status;
}

int cmd_bounds(const airig::SuiteConfig& c, std::vector<std::int64_t> at) {
  const auto problems = airig::prepare_problems(c);
  const std::int64_t n_min = airig::rate_bound_min_iterations(c.params.r);
  if (at.empty()) at = {n_min, c.iterations};
  json out = json::array();
  for (const auto& p : problems) {
    const auto est = airig::estimate_bounds(p.problem, c.bound_samples, c.seed);
    json rows = json::array();
    for (std::int64_t N : at) {
      json row = {{"N", N}, {"valid", N >= n_min}};
      row["suboptimality"] = airig::suboptimality_bound(c.params, est, p.problem.agents(), N);
      row["infeasibility"] = airig::infeasibility_bound(c.params, est, p.problem.agents(), N);
      rows.push_back(row);
    }
    out.push_back({{"tag", p.tag},
                   {"m", p.problem.agents()},
                   {"params", c.params.to_json()},
                   {"bounds", est.to_json()},
                   {"min_N", n_min},
                   {"rhs", rows}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-free incremental gradient solver and benchmark suite"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  bool with_reference = false;

  auto* build = app.add_subcommand("build", "generate an SVM dataset (CSV) and instance (JSON)");
  build->add_option("-c,--config", config_path, "suite config JSON");
  add_suite_flags(build, o);
  build->add_flag("--reference", with_reference, "also solve for the reference optimum");

  auto* run = app.add_subcommand("run", "run a solver suite, writing traces and summary.json");
  run->add_option("-c,--config", config_path, "suite config JSON");
  add_suite_flags(run, o);

  std::vector<std::string> traces;
  std::optional<double> fit_f_star;
  std::string summary_path;
  double window = 0.5;
  auto* fit = app.add_subcommand("fit", "fit log-log rates to existing traces");
  fit->add_option("traces", traces, "trace CSV files")->required();
  fit->add_option("--f-star", fit_f_star);
  fit->add_option("--summary", summary_path, "summary.json supplying f_star and bound constants");
  fit->add_option("--window", window, "fraction of records at the tail used for the fit");

  std::vector<std::int64_t> at;
  auto* bounds = app.add_subcommand("bounds", "print rate-bound right-hand sides for a config");
  bounds->add_option("-c,--config", config_path, "suite config JSON");
  add_suite_flags(bounds, o);
  bounds->add_option("--at", at, "iteration counts N to evaluate")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmd_build(resolve_config(config_path, o), with_reference);
    if (*run) return cmd_run(resolve_config(config_path, o));
    if (*fit) return cmd_fit(traces, fit_f_star, summary_path, window);
    if (*bounds) return cmd_bounds(resolve_config(config_path, o), at);
  } catch (const std::exception& e) {
    std::cerr << "airig: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
