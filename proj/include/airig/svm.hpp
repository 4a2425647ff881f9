#pragma once

#include "airig/common.hpp"
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

struct SvmDataset {
  Matrix U;  // N x n, one sample per row
  Vector v;  // labels in {-1, +1}
  std::uint64_t seed = 0;

  Index samples() const { return U.rows(); }
  Index features() const { return U.cols(); }
};

/// Two unit-covariance Gaussian clusters centred at +-(separation/2) e_1.
/// Samples alternate between the +1 and -1 cluster; each label is then
/// flipped independently with probability flip_prob.
SvmDataset generate_data(Index N, Index n, double separation, double flip_prob, std::uint64_t seed);

/// One row per sample: the n features, then the label. No header.
void write_dataset_csv(const SvmDataset& data, const std::string& path);
SvmDataset read_dataset_csv(const std::string& path);

struct SvmInstance {
  SvmDataset dataset;
  double lambda = 0.0;
  Index m = 0;
  SvmLayout layout;
  MarginAggregation aggregation = MarginAggregation::Max;
  double box_radius = 0.0;
  std::vector<std::pair<Index, Index>> agent_samples;  // (first, count) per agent
  ProblemSpec problem;       // form used by the projection-free method
  PolyhedralSet polyhedron;  // margin rows then z >= 0 rows, for the baselines

  Index dimension() const { return layout.dimension(); }
  const BoxSet& box() const { return problem.box(); }

  /// 0.5 ||w||^2 + (1/lambda) sum z
  double objective(const Vector& x) const;

  /// {lambda, m, box_radius, h_mode, problem, polyhedron}
  nlohmann::json to_json() const;
};

/// 10 (1 + sqrt(2N / lambda)): the objective at (0, 0, 1) caps ||w*|| by
/// sqrt(2N / lambda), and the factor leaves room for b* and z*.
double default_box_radius(Index N, double lambda);

/// Splits the samples into m contiguous blocks of N/m, the last agent taking
/// the remainder. A non-positive or absent box_radius selects the default.
SvmInstance build_instance(const SvmDataset& dataset, double lambda, Index m,
                           std::optional<double> box_radius = std::nullopt,
                           MarginAggregation aggregation = MarginAggregation::Max);

struct ReferenceOptimum {
  Vector x;
  double f = 0.0;
  double kkt_residual = 0.0;
  std::int64_t iterations = 0;
};

/// Solves min 0.5 ||w||^2 + (1/lambda) sum z over the polyhedron.
ReferenceOptimum reference_optimum(const SvmInstance& instance, double tol = kDefaultQpTol);

/// Throws ContractViolation unless x lies strictly inside the instance box.
void validate_box_interior(const SvmInstance& instance, const Vector& x);

/// Benchmark setup: m = 20, lambda = 10, gamma0 = eta0 = 1, b = 0.25, over
/// the grid N in {100, 200, 500} x n in {50, 100}.
struct SvmBenchmarkPreset {
  static constexpr Index agents = 20;
  static constexpr double lambda = 10.0;
  static ScheduleParams params() { return {1.0, 1.0, 0.25, 0.0}; }
  static std::vector<std::pair<Index, Index>> grid() {
    return {{100, 50}, {100, 100}, {200, 50}, {200, 100}, {500, 50}, {500, 100}};
  }
};

}  // namespace airig
