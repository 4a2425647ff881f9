#pragma once

#include "airig/common.hpp"
#include "airig/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace airig {

/// Compact box lower <= x <= upper. All bounds finite.
class BoxSet {
 public:
  BoxSet() = default;
  BoxSet(Vector lower, Vector upper);

  /// [-radius, radius]^n
  static BoxSet cube(Index n, double radius);

  Index dimension() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool contains(const Vector& x) const;

  /// Point of the box with the largest Euclidean norm.
  Vector farthest_corner() const;

 private:
  Vector lower_;
  Vector upper_;
};

/// Componentwise clamp onto the box.
Vector project_box(const BoxSet& box, const Vector& z);
void project_box_inplace(const BoxSet& box, Vector& z);

/// Local data of one agent: f_i, h_i and the equality pair A_i x = b_i.
struct AgentBlock {
  OraclePtr f;
  OraclePtr h;
  Matrix A;  // d_i x n, possibly 0 rows
  Vector b;
};

/// Penalty applied to h_i in the infeasibility metric.
///   Hinge:   max{0, h},        subgradient 1{h > 0} * dh
///   Product: 0.5 max{0, h}^2,  subgradient max{0, h} * dh
enum class PhiMode { Hinge, Product };

std::string to_string(PhiMode mode);
PhiMode phi_mode_from_string(const std::string& s);

/// min sum_i f_i(x)  s.t.  h_i(x) <= 0, A_i x = b_i, x_j >= 0 (j in J), x in X.
class ProblemSpec {
 public:
  ProblemSpec() = default;
  ProblemSpec(Index n, std::vector<AgentBlock> blocks, BoxSet box, std::vector<Index> nonneg,
              PhiMode mode = PhiMode::Hinge);

  Index dimension() const { return n_; }
  Index agents() const { return static_cast<Index>(blocks_.size()); }
  const std::vector<AgentBlock>& blocks() const { return blocks_; }
  const AgentBlock& block(Index i) const { return blocks_[static_cast<std::size_t>(i)]; }
  const BoxSet& box() const { return box_; }
  std::span<const Index> nonneg() const { return nonneg_; }
  PhiMode phi_mode() const { return mode_; }

  ProblemSpec with_phi_mode(PhiMode mode) const;

  /// Total equality rows p = sum_i d_i.
  Index equality_rows() const;

  /// (A_1; ...; A_m) and (b_1; ...; b_m).
  Matrix stacked_A() const;
  Vector stacked_b() const;

  /// f(x) = sum_i f_i(x)
  double objective(const Vector& x) const;

 private:
  Index n_ = 0;
  std::vector<AgentBlock> blocks_;
  BoxSet box_;
  std::vector<Index> nonneg_;
  PhiMode mode_ = PhiMode::Hinge;
};

/// phi_i(x) = 0.5 ||A_i x - b_i||^2 + pen(h_i(x)) + sum_{j in J} max{-x_j, 0} / m
double eval_phi_agent(const AgentBlock& block, const Vector& x, std::span<const Index> nonneg,
                      Index m, PhiMode mode);

/// phi(x) = sum_i phi_i(x)
double eval_phi_total(const ProblemSpec& problem, const Vector& x);

/// A_i^T (A_i x - b_i) + xi_h + 1^-(x) / m, a subgradient of eval_phi_agent.
Vector subgrad_phi_agent(const AgentBlock& block, const Vector& x, std::span<const Index> nonneg,
                         Index m, PhiMode mode);

/// Allocation-free variant for inner loops; `scratch` receives the h_i
/// subgradient.
void subgrad_phi_agent_into(const AgentBlock& block, const Vector& x,
                            std::span<const Index> nonneg, Index m, PhiMode mode, Vector& out,
                            Vector& scratch);

/// Constants bounding subgradients, iterates and the objective over X.
struct BoundEstimates {
  double C = 0.0;    // sum_i ||dphi_i|| <= C and ||dphi_i|| <= C / m
  double C_f = 0.0;  // sum_i ||df_i|| <= C_f and ||df_i|| <= C_f / m
  double M = 0.0;    // ||x|| <= M
  double M_f = 0.0;  // |f(x)| <= M_f

  nlohmann::json to_json() const;
  static BoundEstimates from_json(const nlohmann::json& j);
};

inline constexpr double kBoundSafetyFactor = 1.25;
inline constexpr double kBoundFloor = 1e-12;

/// Samples X uniformly (plus every corner when n <= 12 and the farthest
/// corner always), takes maxima and inflates them by kBoundSafetyFactor.
BoundEstimates estimate_bounds(const ProblemSpec& problem, std::size_t samples, std::uint64_t seed);

/// Problem file format: {n, J, box:{lower, upper}, phi_mode?, blocks:[{A, b, f, h}]}.
ProblemSpec problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ProblemSpec& problem);

}  // namespace airig
