#pragma once

#include "airig/oracle.hpp"
#include "airig/problem.hpp"
#include "airig/qp.hpp"
#include "airig/schedules.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace airig {

/// Name of the built-in synthetic SVM benchmark.
inline constexpr const char* kSvmPreset = "paper-fig1";

/// Synthetic SVM data and instance settings.
struct SvmConfig {
  Index samples = 100;
  Index features = 50;
  Index agents = 20;
  double lambda = 10.0;
  double separation = 2.0;
  double flip_prob = 0.05;
  std::uint64_t seed = 1;
  std::optional<double> box_radius;
  MarginAggregation h_mode = MarginAggregation::Max;
};

/// Benchmark suite settings. `problem` is the preset name kSvmPreset (SVM
/// instances built from `svm`, one per grid cell) or the path of a problem
/// JSON file, either a bare problem or an exported instance carrying a
/// "polyhedron" for the baselines.
struct SuiteConfig {
  std::string problem = kSvmPreset;
  SvmConfig svm;
  std::vector<std::pair<Index, Index>> grid;  // (samples, features); empty = the svm cell only
  std::vector<std::string> solvers = {"airig", "proj_ig", "prox_iag", "saga"};
  ScheduleParams params;
  std::int64_t iterations = 1000;
  std::optional<double> budget_s;
  std::int64_t eval_every = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "airig_out";
  int workers = 1;
  std::optional<double> f_star;
  double window_fraction = 0.5;
  std::int64_t pilot_iterations = 20;
  std::size_t bound_samples = 256;

  /// Missing keys keep their defaults; unknown keys are rejected. The
  /// iteration count is read from "N".
  static SuiteConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Throws ContractViolation on an empty solver list ("no solvers"),
  /// unknown solver names or out-of-range values.
  void validate() const;
};

inline constexpr const char* kOutputDirEnv = "AIRIG_OUTPUT_DIR";

/// Replaces output_dir by $AIRIG_OUTPUT_DIR when that is set and non-empty.
void apply_environment(SuiteConfig& config);

/// A problem prepared for the suite.
struct SuiteProblem {
  std::string tag;
  ProblemSpec problem;
  std::optional<PolyhedralSet> polyhedron;
  std::optional<double> f_star;
  std::string f_star_source;  // "config", "reference", "file" or "none"
};

/// Builds (or loads) every problem named by the config, computing reference
/// optima for SVM cells unless f_star is given.
std::vector<SuiteProblem> prepare_problems(const SuiteConfig& config);

struct SuiteResult {
  int exit_code = 0;
  nlohmann::json summary;
  std::vector<std::string> trace_files;
};

/// Runs every (problem, solver) pair, writing `<tag>__<solver>.csv` traces
/// and summary.json into output_dir. Failed runs are listed under "errors"
/// and make the exit code nonzero; the remaining runs still execute.
SuiteResult run_suite(const SuiteConfig& config);

}  // namespace airig
