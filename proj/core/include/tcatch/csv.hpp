#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tcatch/tensor.hpp"

namespace tcatch::csv {

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double value);

/// Headerless numeric CSV, one row per line. An empty file yields a 0 x 0 matrix.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

/// One-column CSV of integer labels.
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Single row of numbers.
std::vector<double> read_row(const std::filesystem::path& path);
void write_row(const std::filesystem::path& path, const std::vector<double>& values);

} // namespace tcatch::csv
