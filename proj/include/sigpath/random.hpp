#pragma once

#include "sigpath/tensor3.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sigpath {

using Rng = std::mt19937_64;

// splitmix64 finalizer; mixes a 64-bit word into a well-spread seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream seed from a base seed and a list of labels,
/// e.g. (seed, m, d, trial). Results never depend on scheduling order.
inline std::uint64_t stream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = mix64(seed);
  for (auto l : labels) h = mix64(h ^ mix64(l + 0x632be59bd9b4e019ULL));
  return h;
}

/// Matrix with i.i.d. N(0, scale^2) entries.
inline Mat random_normal(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = n(rng);
  return a;
}

inline Tensor3 random_tensor(Index n1, Index n2, Index n3, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor3 t(n1, n2, n3);
  for (double& v : t.data()) v = n(rng);
  return t;
}

}  // namespace sigpath
