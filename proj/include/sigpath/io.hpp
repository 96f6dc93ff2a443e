/**
 * @file io.hpp
 * JSON formats shared by the command-line tool:
 *   tensor  {"dims":[n1,n2,n3],"data":[...]}
 *   matrix  {"rows":r,"cols":c,"data":[...]}
 *   triple  {"sig1":[...],"sig2":<matrix>,"sig3":<tensor>}
 * Data arrays follow the library storage order (row-major, last index fastest).
 */
#pragma once

#include "sigpath/identifiability.hpp"
#include "sigpath/recovery.hpp"
#include "sigpath/signatures.hpp"
#include "sigpath/tensor3.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sigpath {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> finite_array(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + ": \"data\" must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw FormatError(std::string(what) + ": non-numeric entry");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw FormatError(std::string(what) + ": non-finite entry");
    out.push_back(x);
  }
  return out;
}

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline json to_json(const Tensor3& t) {
  return {{"dims", {t.dim(0), t.dim(1), t.dim(2)}}, {"data", t.values()}};
}

inline json to_json(const Mat& a) {
  return {{"rows", a.rows()},
          {"cols", a.cols()},
          {"data", std::vector<double>(a.data(), a.data() + a.size())}};
}

inline json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Tensor3 tensor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("data"))
    throw FormatError("tensor: expected {\"dims\":[n1,n2,n3],\"data\":[...]}");
  const auto dims = j.at("dims").get<std::vector<Index>>();
  if (dims.size() != 3) throw FormatError("tensor: \"dims\" must have three entries");
  try {
    return Tensor3({dims[0], dims[1], dims[2]}, detail::finite_array(j.at("data"), "tensor"));
  } catch (const DimensionError& e) {
    throw FormatError(e.what());
  }
}

inline Mat mat_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw FormatError("matrix: expected {\"rows\":r,\"cols\":c,\"data\":[...]}");
  const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  const auto data = detail::finite_array(j.at("data"), "matrix");
  if (r < 0 || c < 0 || static_cast<Index>(data.size()) != r * c)
    throw FormatError("matrix: data length does not match rows*cols");
  return Eigen::Map<const Mat>(data.data(), r, c);
}

inline json to_json(const SignatureTriple& s) {
  return {{"sig1", to_json(s.sig1)}, {"sig2", to_json(s.sig2)}, {"sig3", to_json(s.sig3)}};
}

inline SignatureTriple triple_from_json(const json& j) {
  SignatureTriple s;
  const auto v = detail::finite_array(j.at("sig1"), "sig1");
  s.sig1 = Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
  s.sig2 = mat_from_json(j.at("sig2"));
  s.sig3 = tensor_from_json(j.at("sig3"));
  return s;
}

/// A signature file may hold a bare tensor or a full triple.
inline Tensor3 signature_tensor_from_json(const json& j) {
  if (j.is_object() && j.contains("sig3")) return tensor_from_json(j.at("sig3"));
  return tensor_from_json(j);
}

inline json to_json(const BoundsReport& b) {
  return {{"m", b.m},
          {"norm_C", b.norm_c},
          {"sigma_flat", {b.sigma_flat[0], b.sigma_flat[1], b.sigma_flat[2]}},
          {"sigma_concat", b.sigma_concat},
          {"upper_bound", detail::finite_or_null(b.upper_bound)},
          {"lower_bound", detail::finite_or_null(b.lower_bound)}};
}

inline json to_json(const RecoveryReport& r) {
  json j = {{"X_star", to_json(r.x_star)},
            {"residual", r.residual},
            {"relative_residual", r.relative_residual},
            {"restarts_used", r.restarts_used},
            {"grad_norm", r.grad_norm},
            {"iterations", {{"bfgs", r.bfgs_iterations}, {"tr", r.tr_iterations}}}};
  if (r.rel_matrix_err) j["rel_matrix_err"] = detail::finite_or_null(*r.rel_matrix_err);
  if (r.classification) j["classification"] = to_string(*r.classification);
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(1) + "\n");
}

}  // namespace sigpath
