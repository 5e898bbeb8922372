#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "pairprox/error.hpp"
#include "pairprox/linalg.hpp"

namespace pairprox {

// Text format: a "rows cols" header line, then one whitespace-separated row
// per line. Blank lines are skipped.

namespace detail {

inline bool next_content_line(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] inline void parse_fail(const std::string& source, std::size_t line_no, const std::string& what) {
  fail(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace detail

inline DenseMatrix read_matrix(std::istream& in, const std::string& source = "<matrix>") {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::next_content_line(in, line, line_no)) {
    detail::parse_fail(source, line_no, "empty input, expected header \"rows cols\"");
  }
  std::istringstream header(line);
  long long rows = -1;
  long long cols = -1;
  std::string extra;
  if (!(header >> rows >> cols) || (header >> extra) || rows < 0 || cols < 0) {
    detail::parse_fail(source, line_no, "expected header \"rows cols\" with two non-negative integers");
  }
  DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!detail::next_content_line(in, line, line_no)) {
      detail::parse_fail(source, line_no,
                         "expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    }
    std::istringstream row(line);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::string token;
      if (!(row >> token)) {
        detail::parse_fail(source, line_no,
                           "row " + std::to_string(i) + " has " + std::to_string(j) + " entries, expected " +
                               std::to_string(cols));
      }
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        detail::parse_fail(source, line_no, "not a number: '" + token + "'");
      }
      if (!std::isfinite(m(i, j))) detail::parse_fail(source, line_no, "non-finite entry");
    }
    std::string token;
    if (row >> token) {
      detail::parse_fail(source, line_no, "row " + std::to_string(i) + " has more than " + std::to_string(cols) +
                                              " entries");
    }
  }
  if (detail::next_content_line(in, line, line_no)) {
    detail::parse_fail(source, line_no, "trailing data after " + std::to_string(rows) + " rows");
  }
  return m;
}

inline DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open matrix file '" + path + "'");
  return read_matrix(in, path);
}

inline void write_matrix(std::ostream& out, const DenseMatrix& m) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

inline void write_matrix_file(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::ParseError, "cannot write '" + path + "'");
  write_matrix(out, m);
}

/// Vectors are stored as n x 1 matrices.
inline DenseMatrix as_column(const Vector& v) { return DenseMatrix(v.size(), 1, v.values()); }

inline Vector column_to_vector(const DenseMatrix& m, const std::string& source = "<vector>") {
  if (m.cols() != 1 && !(m.rows() == 1)) {
    fail(ErrorCode::ParseError, source + ": expected an n x 1 or 1 x n matrix");
  }
  return Vector(m.entries());
}

inline void write_vector(std::ostream& out, const Vector& v) { write_matrix(out, as_column(v)); }

}  // namespace pairprox
