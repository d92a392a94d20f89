#include "tcatch/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tcatch/errors.hpp"

namespace tcatch::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw IoError(path.string() + ":" + std::to_string(line) + ": cannot parse '" +
                  std::string(field) + "'");
  return value;
}

template <class T>
std::vector<std::vector<T>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<T>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<T> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_field<T>(rest.substr(0, comma), path, lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && rows.front().size() != row.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(rows.front().size()) + " columns, found " +
                    std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

} // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Matrix read_matrix(const std::filesystem::path& path) {
  const auto rows = read_rows<double>(path);
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  const auto rows = read_rows<int>(path);
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.size() != 1) throw IoError(path.string() + ": label file must have one column");
    labels.push_back(r.front());
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int y : labels) out << y << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_row(const std::filesystem::path& path) {
  const auto rows = read_rows<double>(path);
  if (rows.size() != 1) throw IoError(path.string() + ": expected a single row");
  return rows.front();
}

void write_row(const std::filesystem::path& path, const std::vector<double>& values) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_double(values[i]);
  }
  out << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

} // namespace tcatch::csv
