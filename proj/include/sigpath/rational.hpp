/**
 * @file rational.hpp
 * Exact rational tensors and matrices on top of GMP, fraction-free
 * (Bareiss) determinants and small-prime factorization.
 */
#pragma once

#include "sigpath/tensor3.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigpath {

/// Cubical tensor with exact rational entries, same storage order as Tensor3.
struct RationalTensor {
  Index n = 0;
  std::vector<mpq_class> data;

  explicit RationalTensor(Index side = 0)
      : n(side), data(static_cast<std::size_t>(side * side * side), mpq_class(0)) {}

  mpq_class& operator()(Index i, Index j, Index k) { return data[idx(i, j, k)]; }
  const mpq_class& operator()(Index i, Index j, Index k) const { return data[idx(i, j, k)]; }

  Tensor3 to_double() const {
    Tensor3 t = Tensor3::cube(n);
    for (std::size_t p = 0; p < data.size(); ++p) t.data()[p] = data[p].get_d();
    return t;
  }

 private:
  std::size_t idx(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * n + j) * n + k);
  }
};

/// Dense matrix of reduced rationals (mpq_class keeps gcd = 1, den > 0).
class RationalMat {
 public:
  RationalMat(Index rows, Index cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), mpq_class(0)) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  mpq_class& operator()(Index r, Index c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
  const mpq_class& operator()(Index r, Index c) const {
    return data_[static_cast<std::size_t>(r * cols_ + c)];
  }

  Mat to_double() const {
    Mat a(rows_, cols_);
    for (Index r = 0; r < rows_; ++r)
      for (Index c = 0; c < cols_; ++c) a(r, c) = (*this)(r, c).get_d();
    return a;
  }

 private:
  Index rows_, cols_;
  std::vector<mpq_class> data_;
};

inline RationalTensor core_axis_exact(Index m) {
  RationalTensor c(m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j)
      for (Index k = j; k < m; ++k) {
        if (i < j && j < k)
          c(i, j, k) = 1;
        else if (i == j && j == k)
          c(i, j, k) = mpq_class(1, 6);
        else
          c(i, j, k) = mpq_class(1, 2);
      }
  return c;
}

inline RationalTensor core_mono_exact(Index m) {
  RationalTensor c(m);
  for (long i = 1; i <= m; ++i)
    for (long j = 1; j <= m; ++j)
      for (long k = 1; k <= m; ++k) {
        mpq_class v(j * k, (i + j) * (i + j + k));
        v.canonicalize();
        c(i - 1, j - 1, k - 1) = v;
      }
  return c;
}

/// Exact determinant. Each row is scaled to integers by the lcm of its
/// denominators, then Bareiss fraction-free elimination runs over mpz.
inline mpq_class bareiss_determinant(const RationalMat& a) {
  if (a.rows() != a.cols()) throw DimensionError("bareiss_determinant: matrix is not square");
  const Index n = a.rows();
  if (n == 0) return mpq_class(1);

  std::vector<mpz_class> m(static_cast<std::size_t>(n * n));
  auto at = [&](Index r, Index c) -> mpz_class& { return m[static_cast<std::size_t>(r * n + c)]; };
  mpz_class scale = 1;
  for (Index r = 0; r < n; ++r) {
    mpz_class l = 1;
    for (Index c = 0; c < n; ++c) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a(r, c).get_den_mpz_t());
    for (Index c = 0; c < n; ++c) at(r, c) = a(r, c).get_num() * (l / a(r, c).get_den());
    scale *= l;
  }

  int sign = 1;
  mpz_class prev = 1;
  for (Index k = 0; k < n - 1; ++k) {
    if (at(k, k) == 0) {
      Index p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return mpq_class(0);
      for (Index c = 0; c < n; ++c) std::swap(at(k, c), at(p, c));
      sign = -sign;
    }
    for (Index i = k + 1; i < n; ++i) {
      for (Index j = k + 1; j < n; ++j) {
        at(i, j) = at(i, j) * at(k, k) - at(i, k) * at(k, j);
        mpz_divexact(at(i, j).get_mpz_t(), at(i, j).get_mpz_t(), prev.get_mpz_t());
      }
      at(i, k) = 0;
    }
    prev = at(k, k);
  }
  mpq_class det(at(n - 1, n - 1) * sign, scale);
  det.canonicalize();
  return det;
}

/// Exact congruence action [[C; X, X, X]] for an integer-valued or rational X.
inline RationalTensor congruence_exact(const RationalTensor& c, const RationalMat& x) {
  if (x.cols() != c.n) throw DimensionError("congruence_exact: X columns must match core side");
  const Index m = c.n, d = x.rows();
  // three mode products, as in the floating-point version
  std::vector<mpq_class> t1(static_cast<std::size_t>(d * m * m)), t2(static_cast<std::size_t>(d * d * m));
  for (Index a = 0; a < d; ++a)
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k) {
        mpq_class s = 0;
        for (Index i = 0; i < m; ++i) s += x(a, i) * c(i, j, k);
        t1[static_cast<std::size_t>((a * m + j) * m + k)] = s;
      }
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      for (Index k = 0; k < m; ++k) {
        mpq_class s = 0;
        for (Index j = 0; j < m; ++j) s += x(b, j) * t1[static_cast<std::size_t>((a * m + j) * m + k)];
        t2[static_cast<std::size_t>((a * d + b) * m + k)] = s;
      }
  RationalTensor out(d);
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      for (Index g = 0; g < d; ++g) {
        mpq_class s = 0;
        for (Index k = 0; k < m; ++k) s += x(g, k) * t2[static_cast<std::size_t>((a * d + b) * m + k)];
        out(a, b, g) = s;
      }
  return out;
}

/// Prime-power factorization of a positive integer over the given primes.
/// `cofactor` receives whatever is left after trial division.
inline std::map<unsigned long, unsigned long> factor_over(mpz_class value,
                                                          const std::vector<unsigned long>& primes,
                                                          mpz_class& cofactor) {
  if (value < 0) value = -value;
  std::map<unsigned long, unsigned long> out;
  for (unsigned long p : primes) {
    while (value != 0 && mpz_divisible_ui_p(value.get_mpz_t(), p)) {
      value /= p;
      ++out[p];
    }
  }
  cofactor = value;
  return out;
}

}  // namespace sigpath
