#pragma once

#include "airig/common.hpp"

#include <json.hpp>

#include <string>

namespace airig::json_io {

nlohmann::json from_vector(const Vector& v);

/// Row-major array of arrays.
nlohmann::json from_matrix(const Matrix& m);

Vector to_vector(const nlohmann::json& j, const std::string& what);

/// `cols` fixes the width when the array has no rows.
Matrix to_matrix(const nlohmann::json& j, Index cols, const std::string& what);

nlohmann::json read_file(const std::string& path);

/// Writes through a temporary file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace airig::json_io
