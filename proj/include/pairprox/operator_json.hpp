#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pairprox/error.hpp"
#include "pairprox/matrix_io.hpp"
#include "pairprox/operators.hpp"

namespace pairprox {

// JSON mirror of the OperatorExpr tree:
//   {"kind": "affine", "matrix-file": "A.txt" | "matrix": [[..]], "offset": [..]}
//   {"kind": "sign-block", "scale": s, "permutation": [..]}
//   {"kind": "permutation", "permutation": [..], "signs": [..]}
//   {"kind": "pointwise", "registry-name": "abs-sin", "dim": n}
//   {"kind": "identity", "dim": n}
//   {"kind": "scale", "scale": g, "terms": [inner]}
//   {"kind": "sum", "terms": [..]}
//   {"kind": "stack", "dim": n, "blocks": [{"begin": b, "count": k, "operator": {..}}]}
// Relative matrix-file paths resolve against `base_dir`.

namespace detail {

[[noreturn]] inline void json_fail(const std::string& msg) { fail(ErrorCode::ParseError, "operator json: " + msg); }

inline const nlohmann::json& json_field(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) json_fail(std::string("missing key '") + key + "'");
  return j.at(key);
}

inline Vector json_vector(const nlohmann::json& j) {
  if (!j.is_array()) json_fail("expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) json_fail("expected an array of numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline std::vector<std::size_t> json_indices(const nlohmann::json& j) {
  if (!j.is_array()) json_fail("expected an array of indices");
  std::vector<std::size_t> out;
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<long long>() < 0) json_fail("expected non-negative integer indices");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

inline DenseMatrix json_matrix(const nlohmann::json& j) {
  if (!j.is_array()) json_fail("inline matrix must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector r = json_vector(j[i]);
    if (r.size() != cols) json_fail("ragged inline matrix");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = r[k];
  }
  return m;
}

}  // namespace detail

/// Accepts [[..]], "file.txt", {"matrix": [[..]]} or {"matrix-file": "file.txt"}.
inline DenseMatrix matrix_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  auto from_file = [&](const std::string& name) {
    std::filesystem::path p = name;
    if (p.is_relative()) p = base_dir / p;
    return read_matrix_file(p.string());
  };
  if (j.is_array()) return detail::json_matrix(j);
  if (j.is_string()) return from_file(j.get<std::string>());
  if (j.contains("matrix-file")) return from_file(j.at("matrix-file").get<std::string>());
  return detail::json_matrix(detail::json_field(j, "matrix"));
}

inline OperatorExpr operator_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  const std::string kind = detail::json_field(j, "kind").get<std::string>();
  if (kind == "affine") {
    DenseMatrix a = matrix_from_json(j, base_dir);
    Vector c = j.contains("offset") ? detail::json_vector(j.at("offset")) : Vector(a.rows());
    return OperatorExpr::affine(std::move(a), std::move(c));
  }
  if (kind == "sign-block") {
    const double s = j.contains("scale") ? j.at("scale").get<double>() : 1.0;
    return OperatorExpr::sign_block(s, detail::json_indices(detail::json_field(j, "permutation")));
  }
  if (kind == "permutation") {
    std::vector<double> signs;
    if (j.contains("signs")) signs = detail::json_vector(j.at("signs")).values();
    return OperatorExpr::permutation(detail::json_indices(detail::json_field(j, "permutation")), signs);
  }
  if (kind == "pointwise") {
    return OperatorExpr::pointwise(detail::json_field(j, "registry-name").get<std::string>(),
                                   detail::json_field(j, "dim").get<std::size_t>());
  }
  if (kind == "identity") return OperatorExpr::identity(detail::json_field(j, "dim").get<std::size_t>());
  if (kind == "scale") {
    const auto& terms = detail::json_field(j, "terms");
    if (!terms.is_array() || terms.size() != 1) detail::json_fail("scale needs exactly one entry in 'terms'");
    return OperatorExpr::scale(detail::json_field(j, "scale").get<double>(), operator_from_json(terms[0], base_dir));
  }
  if (kind == "sum") {
    const auto& terms = detail::json_field(j, "terms");
    if (!terms.is_array()) detail::json_fail("'terms' must be an array");
    std::vector<OperatorExpr> ops;
    for (const auto& t : terms) ops.push_back(operator_from_json(t, base_dir));
    return OperatorExpr::sum(std::move(ops));
  }
  if (kind == "stack") {
    std::vector<OperatorExpr::Block> blocks;
    for (const auto& b : detail::json_field(j, "blocks")) {
      blocks.push_back({detail::json_field(b, "begin").get<std::size_t>(),
                        detail::json_field(b, "count").get<std::size_t>(),
                        operator_from_json(detail::json_field(b, "operator"), base_dir)});
    }
    return OperatorExpr::stack(detail::json_field(j, "dim").get<std::size_t>(), std::move(blocks));
  }
  detail::json_fail("unknown kind '" + kind + "'");
}

inline nlohmann::json to_json(const OperatorExpr& op) {
  using nlohmann::json;
  return std::visit(
      overloaded{
          [](const AffineOp& a) {
            json rows = json::array();
            for (std::size_t i = 0; i < a.matrix.rows(); ++i) {
              rows.push_back(std::vector<double>(a.matrix.row(i).begin(), a.matrix.row(i).end()));
            }
            return json{{"kind", "affine"}, {"matrix", rows}, {"offset", a.offset.values()}};
          },
          [](const SignBlockOp& s) { return json{{"kind", "sign-block"}, {"scale", s.scale}, {"permutation", s.selector}}; },
          [](const PermutationOp& p) { return json{{"kind", "permutation"}, {"permutation", p.perm}, {"signs", p.signs}}; },
          [](const PointwiseOp& p) { return json{{"kind", "pointwise"}, {"registry-name", p.name}, {"dim", p.dim}}; },
          [](const ScaleOp& s) { return json{{"kind", "scale"}, {"scale", s.factor}, {"terms", json::array({to_json(s.inner)})}}; },
          [](const SumOp& s) {
            json terms = json::array();
            for (const auto& t : s.terms) terms.push_back(to_json(t));
            return json{{"kind", "sum"}, {"terms", terms}};
          },
          [](const StackOp& s) {
            json blocks = json::array();
            for (const auto& b : s.blocks) {
              blocks.push_back(json{{"begin", b.begin}, {"count", b.count}, {"operator", to_json(b.op)}});
            }
            return json{{"kind", "stack"}, {"dim", s.dim}, {"blocks", blocks}};
          },
      },
      op.node().op);
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline OperatorExpr read_operator_file(const std::string& path) {
  const auto j = read_json_file(path);
  try {
    return operator_from_json(j, std::filesystem::path(path).parent_path());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace pairprox
