/**
 * @file tensor3.hpp
 * Dense real order-3 tensors and the multilinear (Tucker-style) products
 * used throughout the library.
 *
 * Storage is row-major with the last index fastest: entry (i,j,k) of an
 * n1 x n2 x n3 tensor lives at offset i*n2*n3 + j*n3 + k. Every file format
 * and every flattening in the library uses this order.
 */
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigpath {

using Index = Eigen::Index;

/// Dense row-major real matrix. Houses path coefficient matrices X (d x m),
/// step matrices, stabilizer candidates and flattenings.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

/// Raised when operand shapes do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tensor3 {
 public:
  using Dims = std::array<Index, 3>;

  Tensor3() = default;

  Tensor3(Index n1, Index n2, Index n3) : dims_{n1, n2, n3} {
    if (n1 < 0 || n2 < 0 || n3 < 0) throw DimensionError("Tensor3: negative dimension");
    data_.assign(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
  }

  Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (dims_[0] < 0 || dims_[1] < 0 || dims_[2] < 0)
      throw DimensionError("Tensor3: negative dimension");
    if (static_cast<Index>(data_.size()) != dims_[0] * dims_[1] * dims_[2])
      throw DimensionError("Tensor3: data length " + std::to_string(data_.size()) +
                           " does not match dims");
  }

  static Tensor3 cube(Index n) { return Tensor3(n, n, n); }

  /// Rank-one tensor a (x) b (x) c.
  static Tensor3 outer(const Vec& a, const Vec& b, const Vec& c) {
    Tensor3 t(a.size(), b.size(), c.size());
    for (Index i = 0; i < a.size(); ++i)
      for (Index j = 0; j < b.size(); ++j)
        for (Index k = 0; k < c.size(); ++k) t(i, j, k) = a[i] * b[j] * c[k];
    return t;
  }

  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }

  const Dims& dims() const { return dims_; }
  Index dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
  Index size() const { return static_cast<Index>(data_.size()); }
  bool is_cubical() const { return dims_[0] == dims_[1] && dims_[1] == dims_[2]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  Tensor3& operator+=(const Tensor3& o) {
    require_same_dims(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same_dims(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  Tensor3& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

  /// Entries viewed as the mode-1 flattening (n1 x n2*n3), no copy.
  Eigen::Map<const Mat> as_mode1() const {
    return {data_.data(), dims_[0], dims_[1] * dims_[2]};
  }
  Eigen::Map<Mat> as_mode1() { return {data_.data(), dims_[0], dims_[1] * dims_[2]}; }

  /// Entries viewed as an (n1*n2) x n3 matrix, no copy.
  Eigen::Map<const Mat> as_mode3_rows() const {
    return {data_.data(), dims_[0] * dims_[1], dims_[2]};
  }

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * dims_[1] + j) * dims_[2] + k);
  }
  void require_same_dims(const Tensor3& o) const {
    if (dims_ != o.dims_) throw DimensionError("Tensor3: dimension mismatch");
  }

  Dims dims_{0, 0, 0};
  std::vector<double> data_;
};

inline bool all_finite(const Mat& a) { return a.allFinite(); }

/// Multilinear product [[T; A, B, C]] with entry
/// sum_{ijk} t_ijk a_{alpha i} b_{beta j} c_{gamma k}.
/// Computed as three successive mode products.
inline Tensor3 multilinear(const Tensor3& t, const Mat& a, const Mat& b, const Mat& c) {
  const auto [n1, n2, n3] = t.dims();
  if (a.cols() != n1 || b.cols() != n2 || c.cols() != n3)
    throw DimensionError("multilinear: matrix columns do not match tensor dims");
  const Index p = a.rows(), q = b.rows(), r = c.rows();

  // mode 1: (p x n1) * (n1 x n2 n3)
  Tensor3 t1(p, n2, n3);
  t1.as_mode1().noalias() = a * t.as_mode1();

  // mode 2: each slice t1[alpha] is n2 x n3
  Tensor3 t2(p, q, n3);
  for (Index alpha = 0; alpha < p; ++alpha) {
    Eigen::Map<const Mat> src(t1.data().data() + alpha * n2 * n3, n2, n3);
    Eigen::Map<Mat> dst(t2.data().data() + alpha * q * n3, q, n3);
    dst.noalias() = b * src;
  }

  // mode 3: (p q x n3) * (n3 x r)
  Tensor3 out(p, q, r);
  Eigen::Map<Mat>(out.data().data(), p * q, r).noalias() = t2.as_mode3_rows() * c.transpose();
  return out;
}

/// The congruence action [[C; X, X, X]] of a d x m matrix on an m x m x m tensor.
inline Tensor3 congruence(const Tensor3& c, const Mat& x) {
  if (!c.is_cubical()) throw DimensionError("congruence: tensor is not cubical");
  if (x.cols() != c.dim(0))
    throw DimensionError("congruence: X has " + std::to_string(x.cols()) +
                         " columns, tensor side is " + std::to_string(c.dim(0)));
  return multilinear(c, x, x, x);
}

/// Mode-i flattening (mode in {1,2,3}). Row r collects the entries whose
/// mode index equals r; columns run lexicographically over the two remaining
/// indices with the earlier remaining mode slower.
inline Mat flatten(const Tensor3& t, int mode) {
  const auto [n1, n2, n3] = t.dims();
  switch (mode) {
    case 1:
      return t.as_mode1();
    case 2: {
      Mat f(n2, n1 * n3);
      for (Index i = 0; i < n1; ++i)
        for (Index j = 0; j < n2; ++j)
          for (Index k = 0; k < n3; ++k) f(j, i * n3 + k) = t(i, j, k);
      return f;
    }
    case 3: {
      Mat f(n3, n1 * n2);
      for (Index i = 0; i < n1; ++i)
        for (Index j = 0; j < n2; ++j)
          for (Index k = 0; k < n3; ++k) f(k, i * n2 + j) = t(i, j, k);
      return f;
    }
    default:
      throw std::invalid_argument("flatten: mode must be 1, 2 or 3");
  }
}

/// [T^(1) | T^(2) | T^(3)], an m x 3m^2 matrix.
inline Mat concat_flatten(const Tensor3& t) {
  if (!t.is_cubical()) throw DimensionError("concat_flatten: tensor is not cubical");
  const Index m = t.dim(0);
  Mat out(m, 3 * m * m);
  for (int mode = 1; mode <= 3; ++mode) out.middleCols((mode - 1) * m * m, m * m) = flatten(t, mode);
  return out;
}

inline double frobenius(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

inline double frobenius(const Mat& a) { return a.norm(); }

/// Tensor contraction <A, B> over all entries.
inline double inner(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims()) throw DimensionError("inner: dimension mismatch");
  double s = 0.0;
  for (Index n = 0; n < a.size(); ++n) s += a.data()[n] * b.data()[n];
  return s;
}

}  // namespace sigpath
