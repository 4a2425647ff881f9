#pragma once

#include "airig/common.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>

namespace airig {

/// Value and one subgradient of a convex function at a point.
struct Evaluation {
  double value = 0.0;
  Vector subgradient;
};

/// First-order oracle for a convex function on R^n.
///
/// Implementations are immutable; one instance may be evaluated concurrently
/// from several threads.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Index dimension() const = 0;

  /// Writes a subgradient into `subgradient` (resized as needed) and returns
  /// the function value.
  virtual double evaluate(const Vector& x, Vector& subgradient) const = 0;

  virtual double value(const Vector& x) const {
    Vector g;
    return evaluate(x, g);
  }

  Evaluation evaluate(const Vector& x) const {
    Evaluation e;
    e.value = evaluate(x, e.subgradient);
    return e;
  }

  /// Builtin-spec description; throws ContractViolation for oracles that
  /// were built from arbitrary callables.
  virtual nlohmann::json to_json() const = 0;
};

using OraclePtr = std::shared_ptr<const Oracle>;

/// c^T x + c0
OraclePtr make_affine(Vector c, double c0 = 0.0);

/// 0.5 x^T Q x + c^T x + c0, Q symmetric positive semidefinite.
OraclePtr make_quadratic(Matrix Q, Vector c, double c0 = 0.0);

/// max_j (G_j x + g_j). A zero row with zero offset turns it into a hinge.
OraclePtr make_max_affine(Matrix G, Vector g);

/// Constant function; convenience for agents without an inequality
/// constraint (value < 0 keeps the hinge inactive everywhere).
OraclePtr make_constant(Index n, double value);

/// Soft-margin SVM pieces on the stacked variable x = (w, b, z) with
/// `features` entries of w and `total_samples` entries of z.
struct SvmLayout {
  Index features = 0;
  Index total_samples = 0;
  Index dimension() const { return features + 1 + total_samples; }
  Index bias_index() const { return features; }
  Index slack_index(Index sample) const { return features + 1 + sample; }
};

/// (count / (2 N)) ||w||^2 + (1/lambda) * sum of z over samples
/// [first, first + count).
OraclePtr make_svm_objective(SvmLayout layout, Index first, Index count, double lambda);

enum class MarginAggregation { Max, SumOfHinges };

/// Local margin constraints of one agent folded into a single convex
/// function of x: max_j (1 - z_j - v_j (w^T u_j + b)) or the sum of their
/// positive parts. Rows of `samples` are u_j for j = first, first + 1, ...
OraclePtr make_svm_margin(SvmLayout layout, Index first, Matrix samples, Vector labels,
                          MarginAggregation aggregation = MarginAggregation::Max);

/// Wraps an arbitrary callable. Not serializable.
OraclePtr make_function_oracle(Index n, std::function<double(const Vector&, Vector&)> fn);

/// Rebuilds an oracle from its builtin-spec.
OraclePtr oracle_from_json(const nlohmann::json& spec, Index n);

}  // namespace airig
