/**
 * @file identifiability.hpp
 * Exact and numerical identifiability checks for the congruence action:
 * symmetric conciseness, stabilizer witnesses for non-concise tensors, the
 * J1 Jacobian criterion for finite stabilizers and the flattening bounds on
 * the numerical non-identifiability kappa(C).
 */
#pragma once

#include "sigpath/linalg.hpp"
#include "sigpath/rational.hpp"
#include "sigpath/tensor3.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace sigpath {

/// No proper subspace W with T in W (x) W (x) W, tested as full row rank of
/// the concatenated flattening at tolerance tol * sigma_max.
inline bool is_symmetrically_concise(const Tensor3& t, double tol = 1e-10) {
  return numerical_rank(concat_flatten(t), tol) == t.dim(0);
}

/// For a non-concise tensor, a stabilizer element I + v v^T with v^T T^(i) = 0
/// for every mode. Returns nothing for concise tensors.
inline std::optional<Mat> nonconcise_witness(const Tensor3& t, double tol = 1e-10) {
  if (!t.is_cubical()) throw DimensionError("nonconcise_witness: tensor is not cubical");
  const Index m = t.dim(0);
  if (m == 0) return std::nullopt;
  const Mat all = concat_flatten(t);
  if (!all.allFinite()) throw SvdError("nonconcise_witness: non-finite entries");

  // Left singular vectors of the wide matrix are eigenvectors of A A^T, but
  // the SVD keeps the small singular values accurate.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(all, Eigen::ComputeFullU);
  if (svd.info() != Eigen::Success) throw SvdError("nonconcise_witness: SVD failed");
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double smin = s.size() >= m ? s[m - 1] : 0.0;
  if (smax > 0.0 && smin > tol * smax) return std::nullopt;

  const Vec v = svd.matrixU().col(m - 1).normalized();
  Mat z = Mat::Identity(m, m) + v * v.transpose();
  const double scale = std::max(1.0, frobenius(t));
  if (frobenius(congruence(t, z) - t) > 1e-10 * scale) return std::nullopt;
  return z;
}

/// The m^2 x m^2 Jacobian block at X = I restricted to third index 1:
/// J1((i,j),(u,v)) = d_ui t_vj1 + d_uj t_iv1 + d_u1 t_ijv.
/// Rows and columns are ordered lexicographically.
inline Mat jacobian_j1(const Tensor3& t) {
  if (!t.is_cubical()) throw DimensionError("jacobian_j1: tensor is not cubical");
  const Index m = t.dim(0);
  Mat j1 = Mat::Zero(m * m, m * m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index v = 0; v < m; ++v) {
        const Index row = i * m + j;
        j1(row, i * m + v) += t(v, j, 0);
        j1(row, j * m + v) += t(i, v, 0);
        j1(row, v) += t(i, j, v);
      }
  return j1;
}

inline RationalMat jacobian_j1_exact(const RationalTensor& t) {
  const Index m = t.n;
  RationalMat j1(m * m, m * m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index v = 0; v < m; ++v) {
        const Index row = i * m + j;
        j1(row, i * m + v) += t(v, j, 0);
        j1(row, j * m + v) += t(i, v, 0);
        j1(row, v) += t(i, j, v);
      }
  return j1;
}

/// Sufficient condition for a finite stabilizer: J1 is numerically
/// invertible (sigma_min > 1e-10 sigma_max).
inline bool finite_stabilizer_certificate(const Tensor3& t) {
  const Vec s = singular_values(jacobian_j1(t));
  return s.size() > 0 && s[0] > 0.0 && s[s.size() - 1] > 1e-10 * s[0];
}

/// Exact variant: det(J1) != 0.
inline bool finite_stabilizer_certificate(const RationalTensor& t) {
  return bareiss_determinant(jacobian_j1_exact(t)) != 0;
}

struct BoundsReport {
  Index m = 0;
  double norm_c = 0.0;
  std::array<double, 3> sigma_flat{};  // smallest singular value of each flattening
  double sigma_concat = 0.0;           // smallest singular value of [C1|C2|C3]
  double upper_bound = 0.0;            // ||C|| / max_i sigma_flat[i]
  double lower_bound = 0.0;            // ||C|| / (7 m^{3/2} sigma_concat)
};

/// Flattening bounds on kappa(C). Assumes C has trivial stabilizer.
/// A zero singular value yields an infinite bound.
inline BoundsReport kappa_bounds(const Tensor3& c) {
  if (!c.is_cubical()) throw DimensionError("kappa_bounds: tensor is not cubical");
  constexpr double inf = std::numeric_limits<double>::infinity();
  BoundsReport r;
  r.m = c.dim(0);
  r.norm_c = frobenius(c);
  for (int mode = 1; mode <= 3; ++mode) r.sigma_flat[mode - 1] = smallest_singular(flatten(c, mode));
  r.sigma_concat = smallest_singular(concat_flatten(c));

  const double best = std::max({r.sigma_flat[0], r.sigma_flat[1], r.sigma_flat[2]});
  r.upper_bound = best > 0.0 ? r.norm_c / best : inf;
  const double denom = 7.0 * std::pow(static_cast<double>(r.m), 1.5) * r.sigma_concat;
  r.lower_bound = denom > 0.0 ? r.norm_c / denom : inf;
  return r;
}

/// kappa(X)^3 * ||C|| / max_i sigma_flat[i], an upper bound on kappa(X, C).
inline double kappa_xc_upper(const Mat& x, const Tensor3& c) {
  if (x.cols() != c.dim(0)) throw DimensionError("kappa_xc_upper: X columns must match core side");
  if (x.rows() < x.cols() || numerical_rank(x) < x.cols())
    throw std::invalid_argument("kappa_xc_upper: X must have full column rank");
  const double k = cond_frobenius(x);
  return k * k * k * kappa_bounds(c).upper_bound;
}

}  // namespace sigpath
