#pragma once

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pairprox/error.hpp"
#include "pairprox/solvers.hpp"

namespace pairprox {

inline constexpr const char* kTraceCsvHeader = "iter,residual,step,err_to_ref,seconds";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_csv_double(const std::string& s, std::size_t line_no) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, "csv line " + std::to_string(line_no) + ": not a number '" + s + "'");
  }
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace detail

/// One row per iteration; iter counts from 1 (row n describes x_n).
inline void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << (k + 1) << ',' << detail::format_double(trace.residual[k]) << ',' << detail::format_double(trace.step[k])
        << ',' << detail::format_double(trace.err_to_ref[k]) << ',' << detail::format_double(trace.seconds[k]) << '\n';
  }
}

inline IterationTrace read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    fail(ErrorCode::ParseError, std::string("trace csv: expected header '") + kTraceCsvHeader + "'");
  }
  IterationTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 5) fail(ErrorCode::ParseError, "trace csv line " + std::to_string(line_no) + ": expected 5 fields");
    if (std::stoull(f[0]) != trace.size() + 1) {
      fail(ErrorCode::ParseError, "trace csv line " + std::to_string(line_no) + ": iterations out of order");
    }
    trace.residual.push_back(detail::parse_csv_double(f[1], line_no));
    trace.step.push_back(detail::parse_csv_double(f[2], line_no));
    trace.err_to_ref.push_back(detail::parse_csv_double(f[3], line_no));
    trace.seconds.push_back(detail::parse_csv_double(f[4], line_no));
  }
  return trace;
}

}  // namespace pairprox
