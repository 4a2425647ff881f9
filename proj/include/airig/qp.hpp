#pragma once

#include "airig/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace airig {

/// {x : C x <= d, E x = g}
struct PolyhedralSet {
  RowMatrix C;
  Vector d;
  RowMatrix E;
  Vector g;

  PolyhedralSet() = default;
  /// Validates shapes; pass 0-row matrices (with n columns) for absent parts.
  PolyhedralSet(RowMatrix C, Vector d, RowMatrix E, Vector g);

  Index dimension() const { return C.cols(); }
  Index inequalities() const { return C.rows(); }
  Index equalities() const { return E.rows(); }

  /// C x <= d + tol (1 + ||d||_inf) and ||E x - g||_inf <= tol.
  bool contains(const Vector& x, double tol) const;

  nlohmann::json to_json() const;
  static PolyhedralSet from_json(const nlohmann::json& j);
};

struct QpSolution {
  Vector x;
  std::vector<Index> active_set;  // inequality rows with a positive multiplier
  Vector multipliers;             // inequalities first, then equalities
  std::int64_t iterations = 0;    // dual sweeps (summed over outer steps)
  double kkt_residual = 0.0;
};

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double certificate_residual)
      : std::runtime_error(what), certificate_residual_(certificate_residual) {}
  /// ||C^T y_C + E^T y_E||_inf of the normalized Farkas direction.
  double certificate_residual() const noexcept { return certificate_residual_; }

 private:
  double certificate_residual_;
};

class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, Vector best, double residual)
      : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}
  const Vector& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Vector best_;
  double residual_;
};

class UnboundedError : public std::runtime_error {
 public:
  UnboundedError(const std::string& what, Vector direction)
      : std::runtime_error(what), direction_(std::move(direction)) {}
  const Vector& direction() const noexcept { return direction_; }

 private:
  Vector direction_;
};

inline constexpr double kDefaultQpTol = 1e-8;

/// Euclidean projection of z onto the polyhedron, no warm start.
QpSolution project_polyhedron(const PolyhedralSet& set, const Vector& z, double tol = kDefaultQpTol);

/// min 0.5 x^T Q x + c^T x over the polyhedron, Q symmetric PSD.
/// Q == I dispatches to project_polyhedron(set, -c).
QpSolution solve_qp(const Matrix& Q, const Vector& c, const PolyhedralSet& set,
                    double tol = kDefaultQpTol);

/// Repeated projections onto one polyhedron, warm-started from the previous
/// call's multipliers. Not thread-safe; use one instance per run.
class PolyhedronProjector {
 public:
  explicit PolyhedronProjector(PolyhedralSet set, double tol = kDefaultQpTol);

  QpSolution project(const Vector& z);
  void reset();

  const PolyhedralSet& set() const { return set_; }

 private:
  PolyhedralSet set_;
  RowMatrix rows_;
  Vector rhs_;
  Vector row_norm2_;
  double tol_;
  Vector warm_;
};

/// Number of projection/QP solves since the last reset (all threads).
std::uint64_t qp_call_count();
void reset_qp_call_count();

}  // namespace airig
