#pragma once

#include <string>
#include <vector>

#include "hogl/types.hpp"

namespace hogl {

// Reads a rectangular numeric CSV; a non-numeric first row is treated as a
// header and skipped.
Matrix read_csv_matrix(const std::string& path);

// Writes a CSV with a header row; values use 17 significant digits so a
// round trip reproduces every double bit-exactly. The write is atomic
// (temp file + rename).
void write_csv_matrix(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& column_names);

std::vector<std::string> numbered_columns(const std::string& prefix, int count);

// Atomic whole-file write used for JSON and report outputs.
void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double value);  // %.17g

}  // namespace hogl
