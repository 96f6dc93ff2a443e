/**
 * @file linalg.hpp
 * SVD-derived scalars: smallest singular value, numerical rank,
 * Moore-Penrose pseudo-inverse and the Frobenius condition number.
 */
#pragma once

#include "sigpath/tensor3.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <stdexcept>

namespace sigpath {

/// Thrown when an SVD cannot be computed (non-finite input or no convergence).
class SvdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_svd_ok(const Eigen::BDCSVD<Eigen::MatrixXd>& svd, const char* who) {
  if (svd.info() != Eigen::Success)
    throw SvdError(std::string(who) + ": SVD failed (non-finite input or no convergence)");
}

}  // namespace detail

/// Singular values in decreasing order.
inline Vec singular_values(const Mat& a) {
  if (!a.allFinite()) throw SvdError("singular_values: non-finite entries");
  if (a.size() == 0) return Vec();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  detail::require_svd_ok(svd, "singular_values");
  return svd.singularValues();
}

inline double smallest_singular(const Mat& a) {
  if (a.size() == 0) throw std::invalid_argument("smallest_singular: empty matrix");
  const Vec s = singular_values(a);
  return s[s.size() - 1];
}

/// Number of singular values above rel_tol * sigma_max.
inline Index numerical_rank(const Mat& a, double rel_tol = 1e-10) {
  const Vec s = singular_values(a);
  if (s.size() == 0 || s[0] == 0.0) return 0;
  return static_cast<Index>(std::count_if(s.begin(), s.end(),
                                          [&](double v) { return v > rel_tol * s[0]; }));
}

/// Moore-Penrose pseudo-inverse; singular values below
/// max(rows, cols) * sigma_max * 1e-14 count as zero.
inline Mat pseudo_inverse(const Mat& a) {
  if (!a.allFinite()) throw SvdError("pseudo_inverse: non-finite entries");
  if (a.size() == 0) return Mat(a.cols(), a.rows());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  detail::require_svd_ok(svd, "pseudo_inverse");
  const Vec& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * s[0] * 1e-14;
  Vec inv = Vec::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] > tol) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// kappa(X) = ||X||_F * ||X^+||_F.
inline double cond_frobenius(const Mat& x) {
  const double nx = x.norm();
  if (nx == 0.0) throw std::invalid_argument("cond_frobenius: zero matrix");
  return nx * pseudo_inverse(x).norm();
}

}  // namespace sigpath
