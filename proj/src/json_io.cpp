#include "airig/json_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace airig::json_io {

nlohmann::json from_vector(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json from_matrix(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector to_vector(const nlohmann::json& j, const std::string& what) {
  require(j.is_array(), what + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), what + ": entry " + std::to_string(i) + " is not a number");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const nlohmann::json& j, Index cols, const std::string& what) {
  require(j.is_array(), what + ": expected an array of rows");
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    require(row.is_array() && static_cast<Index>(row.size()) == cols,
            what + ": row " + std::to_string(r) + " must have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      require(row[c].is_number(), what + ": non-numeric entry in row " + std::to_string(r));
      m(static_cast<Index>(r), c) = row[c].get<double>();
    }
  }
  return m;
}

nlohmann::json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ContractViolation(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace airig::json_io
