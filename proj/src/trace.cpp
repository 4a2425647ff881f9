#include "airig/trace.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace airig {
namespace {

void append_number(std::string& line, double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  line.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

void write_trace_csv(std::ostream& out, const std::vector<IterRecord>& records) {
  out << kTraceHeader << '\n';
  std::string line;
  for (const auto& r : records) {
    line = std::to_string(r.k);
    for (double v : {r.f_bar, r.phi_bar, r.f_last, r.phi_last, r.gamma_k, r.eta_k, r.elapsed}) {
      line.push_back(',');
      append_number(line, v);
    }
    line.push_back('\n');
    out << line;
  }
}

std::string trace_csv(const std::vector<IterRecord>& records) {
  std::ostringstream os;
  write_trace_csv(os, records);
  return os.str();
}

std::vector<IterRecord> read_trace_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw ContractViolation(name + ": empty trace");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw ContractViolation(name + ":1: unexpected header \"" + line + "\"");

  std::vector<IterRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 8> v{};
    std::size_t field = 0;
    std::size_t pos = 0;
    while (pos <= line.size() && field < v.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      const std::string cell = line.substr(pos, comma - pos);
      char* end = nullptr;
      v[field] = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ContractViolation(name + ":" + std::to_string(lineno) + ": bad number \"" + cell + "\"");
      }
      ++field;
      pos = comma + 1;
    }
    if (field != v.size() || pos <= line.size()) {
      throw ContractViolation(name + ":" + std::to_string(lineno) + ": expected 8 fields");
    }
    IterRecord r;
    r.k = static_cast<std::int64_t>(v[0]);
    r.f_bar = v[1];
    r.phi_bar = v[2];
    r.f_last = v[3];
    r.phi_last = v[4];
    r.gamma_k = v[5];
    r.eta_k = v[6];
    r.elapsed = v[7];
    records.push_back(r);
  }
  return records;
}

std::vector<IterRecord> read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open " + path);
  return read_trace_csv(in, path);
}

}  // namespace airig
