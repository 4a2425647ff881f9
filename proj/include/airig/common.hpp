#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace airig {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Raised when a caller breaks a documented precondition (dimension mismatch,
/// out-of-range parameter, malformed input file).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An objective or constraint oracle failed while a solver was running.
class OracleError : public std::runtime_error {
 public:
  OracleError(std::size_t agent, const std::string& what)
      : std::runtime_error("agent " + std::to_string(agent) + ": " + what), agent_(agent) {}

  std::size_t agent() const noexcept { return agent_; }

 private:
  std::size_t agent_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

inline void require_dim(const Vector& x, Index n, const char* what) {
  if (x.size() != n) {
    throw ContractViolation(std::string(what) + ": expected dimension " + std::to_string(n) +
                            ", got " + std::to_string(x.size()));
  }
}

}  // namespace airig
