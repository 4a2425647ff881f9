#pragma once

#include "airig/common.hpp"
#include "airig/schedules.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace airig {

/// One trace row. Record k describes outer iteration k: the stepsize and
/// regularization used by it and the iterates it produced, x_{k+1} (last)
/// and the running average xbar_{k+1}.
struct IterRecord {
  std::int64_t k = 0;
  double f_bar = 0.0;
  double phi_bar = 0.0;
  double f_last = 0.0;
  double phi_last = 0.0;
  double gamma_k = 0.0;
  double eta_k = 0.0;
  double elapsed = 0.0;  // seconds since the run started
};

struct RunHistory {
  std::string solver;
  std::vector<IterRecord> records;
  Vector final_xbar;
  Vector final_x;
  ScheduleParams params;
  std::int64_t N = 0;          // requested outer iterations
  std::int64_t completed = 0;  // outer iterations actually run
  bool truncated = false;      // stopped by the wall-clock budget
  bool x0_projected = false;   // x0 was outside X and got projected

  // Filled only when iterate logging is on: x_0..x_K and xbar_0..xbar_K.
  std::vector<Vector> iterates;
  std::vector<Vector> averages;
  // Filled only when drift logging is on: for cycle k, ||x_k - x_{k,i}|| for
  // i = 1..m+1 (1-based as in the cyclic sweep, x_{k,1} = x_k).
  std::vector<std::vector<double>> drift;
};

inline constexpr const char* kTraceHeader = "k,f_bar,phi_bar,f_last,phi_last,gamma_k,eta_k,elapsed_s";

/// CSV with kTraceHeader, 17 significant digits per value.
void write_trace_csv(std::ostream& out, const std::vector<IterRecord>& records);
std::string trace_csv(const std::vector<IterRecord>& records);

/// Parses a trace written by write_trace_csv; throws ContractViolation naming
/// the offending line.
std::vector<IterRecord> read_trace_csv(std::istream& in, const std::string& name = "trace");
std::vector<IterRecord> read_trace_file(const std::string& path);

}  // namespace airig
