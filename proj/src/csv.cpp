#include "ecsim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ecsim/errors.hpp"
#include "ecsim/version.hpp"

namespace ecsim {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string meta_header(const OutputMeta& meta) {
  std::ostringstream out;
  out << "# ecsim " << kVersion << "\n";
  out << "# config_hash=" << std::hex << meta.config_hash << std::dec << "\n";
  out << "# seed=" << meta.seed << "\n";
  return out.str();
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix,
                      const OutputMeta& meta) {
  std::ofstream out(path);
  if (!out) throw numerical_error("cannot open " + path + " for writing");
  out << meta_header(meta);
  out << matrix.rows() << ',' << matrix.cols() << '\n';
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) out << ',';
      out << format_double(matrix(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw numerical_error("cannot open matrix CSV " + path);
  std::string line;
  Eigen::Index rows = 0, cols = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    char comma;
    std::istringstream dims(line);
    if (!(dims >> rows >> comma >> cols) || rows <= 0 || cols <= 0)
      throw numerical_error(path + ": expected a N,M dimension row, got: " + line);
    break;
  }
  Eigen::MatrixXd matrix(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw numerical_error(path + ": truncated matrix (row " + std::to_string(i) + ")");
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(row, cell, ','))
        throw numerical_error(path + ": short row " + std::to_string(i));
      matrix(i, j) = std::stod(cell);
    }
  }
  return matrix;
}

void write_table_csv(const std::string& path, const OutputMeta& meta,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw numerical_error("cannot open " + path + " for writing");
  out << meta_header(meta);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

}  // namespace ecsim
