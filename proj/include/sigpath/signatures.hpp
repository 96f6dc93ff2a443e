/**
 * @file signatures.hpp
 * Dictionary core tensors, signatures of piecewise-linear and
 * dictionary-represented paths, lower-order signatures from the third one,
 * log-signature components and the universal-variety membership test.
 */
#pragma once

#include "sigpath/random.hpp"
#include "sigpath/tensor3.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigpath {

/// First, second and third order signatures of one path in R^n.
struct SignatureTriple {
  Vec sig1;
  Mat sig2;
  Tensor3 sig3;
};

/// Degree <= 3 log-signature data: P (increment), Q (skew, Levy areas) and
/// the residual L with C = P^3/6 + (P(x)Q + Q(x)P)/2 + L.
struct LieData {
  Vec p;
  Mat q;
  Tensor3 l;
};

/// Piecewise-linear path; column j of `steps` is the j-th increment.
struct PathPL {
  Mat steps;
};

/// Signature data cannot be inverted because the path returns to its start.
class LoopPathError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dimension of the universal variety of third signatures in m-space:
/// m^3/3 + m^2/2 + m/6 (number of Lyndon words of length <= 3).
constexpr long long universal_dimension(long long m) { return (2 * m * m * m + 3 * m * m + m) / 6; }

/// Smallest step count accepted by core_generic: M > m^2/3 + m/2 + 1/6.
constexpr long long min_generic_steps(long long m) { return (2 * m + 1) * (m + 1) / 6 + 1; }

// ---------------------------------------------------------------------------
// Core tensors

/// Core tensor of the axis dictionary (piecewise-linear paths with m steps).
inline Tensor3 core_axis(Index m) {
  if (m < 1) throw std::invalid_argument("core_axis: m must be >= 1");
  Tensor3 c = Tensor3::cube(m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      for (Index k = j; k < m; ++k) {
        if (i < j && j < k)
          c(i, j, k) = 1.0;
        else if (i == j && j == k)
          c(i, j, k) = 1.0 / 6.0;
        else
          c(i, j, k) = 0.5;
      }
  return c;
}

/// Core tensor of the monomial dictionary (t, t^2, ..., t^m):
/// c_ijk = j/(i+j) * k/(i+j+k) with 1-based indices.
inline Tensor3 core_mono(Index m) {
  if (m < 1) throw std::invalid_argument("core_mono: m must be >= 1");
  Tensor3 c = Tensor3::cube(m);
  for (Index i = 1; i <= m; ++i)
    for (Index j = 1; j <= m; ++j)
      for (Index k = 1; k <= m; ++k)
        // one rounding: numerator and denominator are exact integers
        c(i - 1, j - 1, k - 1) =
            static_cast<double>(j * k) / static_cast<double>((i + j) * (i + j + k));
  return c;
}

/// Lower-order signatures of the axis dictionary: all-ones increment and the
/// upper-triangular matrix with 1/2 on the diagonal and 1 above.
inline SignatureTriple axis_signature(Index m) {
  SignatureTriple t;
  t.sig1 = Vec::Ones(m);
  t.sig2 = Mat::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    t.sig2(i, i) = 0.5;
    for (Index j = i + 1; j < m; ++j) t.sig2(i, j) = 1.0;
  }
  t.sig3 = core_axis(m);
  return t;
}

// ---------------------------------------------------------------------------
// Piecewise-linear signatures (Chen's formula)

/// Signature of a piecewise-linear path, degree-3 truncation of
/// exp(Y_1) (x) exp(Y_2) (x) ... (x) exp(Y_M), accumulated one step at a time.
inline SignatureTriple sig_pl(const PathPL& path) {
  const Index d = path.steps.rows();
  SignatureTriple s{Vec::Zero(d), Mat::Zero(d, d), Tensor3::cube(d)};
  for (Index col = 0; col < path.steps.cols(); ++col) {
    const Vec y = path.steps.col(col);
    // a3 += a2 (x) y + a1 (x) y^2/2 + y^3/6, using the old a1, a2
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        const double a2 = s.sig2(i, j);
        const double a1y = s.sig1[i] * y[j] * 0.5;
        const double yy = y[i] * y[j] / 6.0;
        for (Index k = 0; k < d; ++k) s.sig3(i, j, k) += (a2 + a1y + yy) * y[k];
      }
    s.sig2 += s.sig1 * y.transpose() + 0.5 * y * y.transpose();
    s.sig1 += y;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Shuffle relations

/// Largest absolute violation of c_i c_j = c_ij + c_ji and
/// c_i c_jk = c_ijk + c_jik + c_jki over all index triples.
inline double shuffle_residual(const SignatureTriple& s) {
  const Index n = s.sig1.size();
  if (s.sig2.rows() != n || s.sig2.cols() != n || s.sig3.dims() != Tensor3::Dims{n, n, n})
    throw DimensionError("shuffle_residual: inconsistent triple");
  double worst = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      worst = std::max(worst, std::abs(s.sig1[i] * s.sig1[j] - s.sig2(i, j) - s.sig2(j, i)));
      for (Index k = 0; k < n; ++k)
        worst = std::max(worst, std::abs(s.sig1[i] * s.sig2(j, k) - s.sig3(i, j, k) -
                                         s.sig3(j, i, k) - s.sig3(j, k, i)));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Lower signatures from the third

/// Recover sig1 and sig2 from a third signature of a non-loop path.
/// c_i is the real cube root of 6 s_iii; sig2 is read off the shuffle
/// relation at the pivot index with the largest |c_i|.
inline SignatureTriple recover_lower(const Tensor3& s) {
  if (!s.is_cubical()) throw DimensionError("recover_lower: tensor is not cubical");
  const Index d = s.dim(0);
  SignatureTriple out;
  out.sig1 = Vec(d);
  for (Index i = 0; i < d; ++i) out.sig1[i] = std::cbrt(6.0 * s(i, i, i));

  Index pivot = 0;
  out.sig1.cwiseAbs().maxCoeff(&pivot);
  const double cp = out.sig1[pivot];
  const double tol = 1e-8 * std::cbrt(frobenius(s));
  if (d == 0 || std::abs(cp) == 0.0 || std::abs(cp) < tol)
    throw LoopPathError("recover_lower: path is a loop, lower signatures are not determined");

  out.sig2 = Mat(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index k = 0; k < d; ++k)
      out.sig2(j, k) = (s(pivot, j, k) + s(j, pivot, k) + s(j, k, pivot)) / cp;
  out.sig3 = s;
  return out;
}

// ---------------------------------------------------------------------------
// Dictionary-represented paths

/// Signature triple of the path X psi, where C is the core tensor of psi.
/// Lower signatures of psi come from recover_lower(C) and are pushed
/// forward by X; sig3 is the congruence action.
inline SignatureTriple sig_of_matrix(const Tensor3& c, const Mat& x) {
  const SignatureTriple dict = recover_lower(c);
  SignatureTriple out;
  out.sig3 = congruence(c, x);
  out.sig1 = x * dict.sig1;
  out.sig2 = x * dict.sig2 * x.transpose();
  return out;
}

/// Core tensor of a generic dictionary: sig3 of a piecewise-linear path in
/// R^m with M i.i.d. standard normal steps, reproducible from `seed`.
inline Tensor3 core_generic(Index m, Index steps, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("core_generic: m must be >= 1");
  if (steps < min_generic_steps(m))
    throw std::invalid_argument("core_generic: M = " + std::to_string(steps) +
                                " does not exceed m^2/3 + m/2 + 1/6 (need M >= " +
                                std::to_string(min_generic_steps(m)) + ")");
  Rng rng(stream_seed(seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(steps)}));
  return sig_pl(PathPL{random_normal(m, steps, rng)}).sig3;
}

// ---------------------------------------------------------------------------
// Log-signature components and variety membership

namespace detail {

// c_{kij} + c_{ikj} + c_{ijk}: shuffle of k into the word (i, j)
inline double shuffle_in(const Tensor3& c, Index k, Index i, Index j) {
  return c(k, i, j) + c(i, k, j) + c(i, j, k);
}

// linear form standing for p_k p_i p_j
inline double form_ppp(const Tensor3& c, Index k, Index i, Index j) {
  return shuffle_in(c, k, i, j) + shuffle_in(c, k, j, i);
}

// linear form standing for p_k q_ij
inline double form_pq(const Tensor3& c, Index k, Index i, Index j) {
  return 0.5 * (shuffle_in(c, k, i, j) - shuffle_in(c, k, j, i));
}

}  // namespace detail

/// Split a core tensor into P, Q and the degree-3 Lie residual L.
inline LieData extract_lie(const Tensor3& c) {
  const Index m = c.dim(0);
  LieData lie;
  lie.p = recover_lower(c).sig1;
  Index pivot = 0;
  lie.p.cwiseAbs().maxCoeff(&pivot);
  const double pk = lie.p[pivot];

  lie.q = Mat::Zero(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      const double v = detail::form_pq(c, pivot, i, j) / pk;
      lie.q(i, j) = v;
      lie.q(j, i) = -v;
    }

  const Vec& p = lie.p;
  lie.l = c;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k)
        lie.l(i, j, k) -= p[i] * p[j] * p[k] / 6.0 +
                          0.5 * (p[i] * lie.q(j, k) + lie.q(i, j) * p[k]);
  return lie;
}

/// Left-hand side of the reconstruction identity for LieData.
inline Tensor3 reconstruct(const LieData& lie) {
  Tensor3 c = lie.l;
  const Index m = lie.p.size();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k)
        c(i, j, k) += lie.p[i] * lie.p[j] * lie.p[k] / 6.0 +
                      0.5 * (lie.p[i] * lie.q(j, k) + lie.q(i, j) * lie.p[k]);
  return c;
}

/// The m x 2m^2 matrix H[C]: row k, column (i,j) of the first block holds the
/// form for p_k p_i p_j, of the second block the form for p_k q_ij.
inline Mat membership_matrix(const Tensor3& c) {
  if (!c.is_cubical()) throw DimensionError("membership_matrix: tensor is not cubical");
  const Index m = c.dim(0);
  Mat h(m, 2 * m * m);
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j) {
        h(k, i * m + j) = detail::form_ppp(c, k, i, j);
        h(k, m * m + i * m + j) = detail::form_pq(c, k, i, j);
      }
  return h;
}

struct MembershipResult {
  bool member = false;
  double max_minor = 0.0;
};

/// Rank-one test on H[C]: all 2x2 minors must vanish up to tol * ||C||^2.
inline MembershipResult universal_membership(const Tensor3& c, double tol) {
  const Mat h = membership_matrix(c);
  double worst = 0.0;
  for (Index r = 0; r < h.rows(); ++r)
    for (Index s = r + 1; s < h.rows(); ++s)
      for (Index a = 0; a < h.cols(); ++a) {
        const double hra = h(r, a), hsa = h(s, a);
        for (Index b = a + 1; b < h.cols(); ++b)
          worst = std::max(worst, std::abs(hra * h(s, b) - h(r, b) * hsa));
      }
  const double n = frobenius(c);
  return {worst <= tol * n * n, worst};
}

}  // namespace sigpath
