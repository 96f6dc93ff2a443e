/**
 * @file recovery.hpp
 * Recover a coefficient matrix X from a signature tensor S = [[C; X, X, X]]
 * by minimizing g(X) = ||[[C; X, X, X]] - S||^2.
 *
 * Each run starts from an i.i.d. N(0, init_scale^2) matrix, takes up to
 * max_bfgs BFGS steps with Armijo backtracking and then refines with a
 * Gauss-Newton trust-region method. Runs are repeated from fresh starting
 * points until one matches the signature or `restarts` runs are spent; the
 * run with the smallest residual is reported.
 */
#pragma once

#include "sigpath/optimize.hpp"
#include "sigpath/random.hpp"
#include "sigpath/signatures.hpp"
#include "sigpath/tensor3.hpp"

#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace sigpath {

// ---------------------------------------------------------------------------
// Cost, gradient, Jacobian

inline void require_fit_dims(const Tensor3& c, const Tensor3& s, const Mat& x) {
  if (!c.is_cubical() || !s.is_cubical()) throw DimensionError("cost: tensors must be cubical");
  if (x.cols() != c.dim(0) || x.rows() != s.dim(0))
    throw DimensionError("cost: X must be " + std::to_string(s.dim(0)) + " x " +
                         std::to_string(c.dim(0)));
}

/// ||[[C; X, X, X]] - S||^2
inline double cost(const Tensor3& c, const Tensor3& s, const Mat& x) {
  require_fit_dims(c, s, x);
  const double r = frobenius(congruence(c, x) - s);
  return r * r;
}

/// Gradient with respect to the matrix in one slot of <R, [[C; A1, A2, A3]]>,
/// the other two slots held at `a` and `b` (in mode order).
inline Mat slot_adjoint(const Tensor3& r, const Tensor3& c, int mode, const Mat& a, const Mat& b) {
  const Mat id = Mat::Identity(c.dim(mode - 1), c.dim(mode - 1));
  Tensor3 w;
  switch (mode) {
    case 1: w = multilinear(c, id, a, b); break;
    case 2: w = multilinear(c, a, id, b); break;
    default: w = multilinear(c, a, b, id); break;
  }
  return flatten(r, mode) * flatten(w, mode).transpose();
}

/// J^T R for the map X -> [[C; X, X, X]].
inline Mat jacobian_transpose_times(const Tensor3& c, const Mat& x, const Tensor3& r) {
  return slot_adjoint(r, c, 1, x, x) + slot_adjoint(r, c, 2, x, x) + slot_adjoint(r, c, 3, x, x);
}

/// Gradient of the cost, 2 J^T (congruence(C, X) - S).
inline Mat grad_cost(const Tensor3& c, const Tensor3& s, const Mat& x) {
  require_fit_dims(c, s, x);
  return 2.0 * jacobian_transpose_times(c, x, congruence(c, x) - s);
}

/// Dense Jacobian of vec([[C; X, X, X]]) with respect to vec(X): d^3 x dm,
/// rows in tensor storage order, columns in row-major order of X.
inline Mat residual_jacobian(const Tensor3& c, const Mat& x) {
  const Index d = x.rows(), m = x.cols();
  const Mat id = Mat::Identity(m, m);
  const Tensor3 w1 = multilinear(c, id, x, x);
  const Tensor3 w2 = multilinear(c, x, id, x);
  const Tensor3 w3 = multilinear(c, x, x, id);
  Mat jac = Mat::Zero(d * d * d, d * m);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index k = 0; k < d; ++k) {
        const Index row = (i * d + j) * d + k;
        for (Index v = 0; v < m; ++v) {
          jac(row, i * m + v) += w1(v, j, k);
          jac(row, j * m + v) += w2(i, v, k);
          jac(row, k * m + v) += w3(i, j, v);
        }
      }
  return jac;
}

inline Vec flat(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }
inline Mat unflat(const Vec& v, Index rows, Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

/// g(X) as an objective on vec(X). The Hessian model is Gauss-Newton,
/// 2 J^T J, optionally plus the second-order residual term (full Newton).
class SignatureFit {
 public:
  SignatureFit(const Tensor3& core, const Tensor3& target, bool full_newton = false)
      : c_(core), s_(target), d_(target.dim(0)), m_(core.dim(0)), full_newton_(full_newton) {}

  Index rows() const { return d_; }
  Index cols() const { return m_; }

  double value(const Vec& v) const {
    const double r = frobenius(congruence(c_, unflat(v, d_, m_)) - s_);
    return r * r;
  }

  double value_gradient(const Vec& v, Vec& g) const {
    const Mat x = unflat(v, d_, m_);
    const Tensor3 r = congruence(c_, x) - s_;
    g = flat(2.0 * jacobian_transpose_times(c_, x, r));
    const double n = frobenius(r);
    return n * n;
  }

  void update_model(const Vec& v) {
    x_ = unflat(v, d_, m_);
    jac_ = residual_jacobian(c_, x_);
    if (full_newton_) r_ = congruence(c_, x_) - s_;
  }

  Vec model_times(const Vec& p) const {
    Vec out = 2.0 * (jac_.transpose() * (jac_ * p));
    if (full_newton_) {
      const Mat dir = unflat(p, d_, m_);
      Mat second = Mat::Zero(d_, m_);
      for (int mode = 1; mode <= 3; ++mode)
        second += slot_adjoint(r_, c_, mode, dir, x_) + slot_adjoint(r_, c_, mode, x_, dir);
      out += 2.0 * flat(second);
    }
    return out;
  }

 private:
  const Tensor3& c_;
  const Tensor3& s_;
  Index d_, m_;
  bool full_newton_;
  Mat x_, jac_;
  Tensor3 r_;
};

// ---------------------------------------------------------------------------
// Recovery

struct RecoveryConfig {
  double grad_tol = 1e-10;
  int max_bfgs = 100;
  int max_tr = 1000;
  int restarts = 10;
  std::uint64_t seed = 0;
  double success_tol = 1e-5;
  double illcond_tol = 1e-8;
  double init_scale = 1.0;
  bool full_newton = false;

  void validate() const {
    if (!(grad_tol > 0 && success_tol > 0 && illcond_tol > 0 && init_scale > 0))
      throw std::invalid_argument("RecoveryConfig: tolerances must be positive");
    if (max_bfgs < 1 || max_tr < 1 || restarts < 1)
      throw std::invalid_argument("RecoveryConfig: iteration caps must be >= 1");
  }
};

enum class Classification { success, illcond_failure, failure };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::success: return "success";
    case Classification::illcond_failure: return "illcond_failure";
    default: return "failure";
  }
}

struct RecoveryReport {
  Mat x_star;
  double residual = 0.0;  // ||[[C; X*, X*, X*]] - S||
  double relative_residual = 0.0;
  std::optional<double> rel_matrix_err;
  std::optional<Classification> classification;
  int restarts_used = 0;
  double grad_norm = 0.0;
  int bfgs_iterations = 0;
  int tr_iterations = 0;
  std::vector<double> bfgs_history;  // objective along the BFGS stage of the reported run
};

namespace detail {
inline double relative_to(double value, double scale) {
  return value / (scale > 0.0 ? scale : 1.0);
}
}  // namespace detail

/// One BFGS + trust-region run from the given start.
inline RecoveryReport minimize_from(const Tensor3& c, const Tensor3& s, const Mat& x0,
                                    const RecoveryConfig& config) {
  SignatureFit fit(c, s, config.full_newton);
  BfgsOptions bo;
  bo.grad_tol = config.grad_tol;
  bo.max_iter = config.max_bfgs;
  OptimResult stage1 = bfgs_minimize(fit, flat(x0), bo);

  TrustRegionOptions to;
  to.grad_tol = config.grad_tol;
  to.max_iter = config.max_tr;
  OptimResult stage2 = trust_region_minimize(fit, stage1.x, to);

  RecoveryReport rep;
  rep.x_star = unflat(stage2.x, s.dim(0), c.dim(0));
  rep.residual = std::sqrt(std::max(0.0, stage2.value));
  rep.relative_residual = detail::relative_to(rep.residual, frobenius(s));
  rep.grad_norm = stage2.grad_norm;
  rep.bfgs_iterations = stage1.iterations;
  rep.tr_iterations = stage2.iterations;
  rep.bfgs_history = std::move(stage1.history);
  return rep;
}

/// Best of up to config.restarts runs, by residual. Stops early once the
/// relative residual drops below config.illcond_tol.
inline RecoveryReport minimize(const Tensor3& c, const Tensor3& s, const RecoveryConfig& config) {
  config.validate();
  if (!c.is_cubical() || !s.is_cubical()) throw DimensionError("minimize: tensors must be cubical");
  const Index d = s.dim(0), m = c.dim(0);

  RecoveryReport best;
  best.residual = std::numeric_limits<double>::infinity();
  int runs = 0;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(stream_seed(config.seed, {0x7265636fULL, static_cast<std::uint64_t>(r)}));
    const Mat x0 = random_normal(d, m, rng, config.init_scale);
    RecoveryReport rep = minimize_from(c, s, x0, config);
    ++runs;
    if (rep.residual < best.residual || !std::isfinite(best.residual)) best = std::move(rep);
    if (best.relative_residual < config.illcond_tol) break;
  }
  best.restarts_used = runs;
  return best;
}

/// success: ||X* - X|| / ||X*|| < success_tol; illcond_failure: matrices
/// differ but ||sigma3(X*) - S|| / ||S|| < illcond_tol; failure otherwise.
inline Classification classify(RecoveryReport& report, const Mat& x_true, const Tensor3& s,
                               const Tensor3& c, const RecoveryConfig& config) {
  const double nx = report.x_star.norm();
  const double err = nx > 0.0 ? (report.x_star - x_true).norm() / nx
                              : std::numeric_limits<double>::infinity();
  report.rel_matrix_err = err;
  Classification out;
  if (err < config.success_tol)
    out = Classification::success;
  else if (detail::relative_to(frobenius(congruence(c, report.x_star) - s), frobenius(s)) <
           config.illcond_tol)
    out = Classification::illcond_failure;
  else
    out = Classification::failure;
  report.classification = out;
  return out;
}

// ---------------------------------------------------------------------------
// Experiment grid

enum class Dictionary { axis, mono, generic };

inline const char* to_string(Dictionary d) {
  switch (d) {
    case Dictionary::axis: return "axis";
    case Dictionary::mono: return "mono";
    default: return "generic";
  }
}

struct CellResult {
  Index m = 0, d = 0;
  int trials = 0;
  int successes = 0;
  int illcond = 0;
  double mean_residual = 0.0;
  double mean_iters = 0.0;  // BFGS + trust-region iterations of the reported run
  double success_pct() const { return trials ? 100.0 * successes / trials : 0.0; }
};

struct TrialOutcome {
  Classification cls = Classification::failure;
  double residual = 0.0;
  int iterations = 0;
};

/// A single experiment trial: random N(0,1) truth, exact signature, recovery.
inline TrialOutcome run_trial(Dictionary dict, Index m, Index d, int trial,
                              const RecoveryConfig& base) {
  const auto label = [&](std::uint64_t tag) {
    return stream_seed(base.seed, {static_cast<std::uint64_t>(dict), static_cast<std::uint64_t>(m),
                                   static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(trial),
                                   tag});
  };
  Tensor3 core;
  switch (dict) {
    case Dictionary::axis: core = core_axis(m); break;
    case Dictionary::mono: core = core_mono(m); break;
    case Dictionary::generic: core = core_generic(m, min_generic_steps(m), label(1)); break;
  }
  Rng rng(label(2));
  const Mat x_true = random_normal(d, m, rng);
  const Tensor3 s = congruence(core, x_true);

  RecoveryConfig cfg = base;
  cfg.seed = label(3);
  RecoveryReport rep = minimize(core, s, cfg);
  TrialOutcome out;
  out.cls = classify(rep, x_true, s, core, cfg);
  out.residual = rep.residual;
  out.iterations = rep.bfgs_iterations + rep.tr_iterations;
  return out;
}

/// Success rates over cells (m, d) with m <= d. Trials run on `threads`
/// workers; every trial has its own PRNG stream derived from
/// (seed, dictionary, m, d, trial), so results do not depend on scheduling.
inline std::vector<CellResult> experiment_grid(Dictionary dict, std::pair<Index, Index> m_range,
                                               std::pair<Index, Index> d_range, int trials,
                                               const RecoveryConfig& config, unsigned threads = 1) {
  if (trials < 1) throw std::invalid_argument("experiment_grid: trials must be >= 1");
  config.validate();
  struct Task {
    std::size_t cell;
    int trial;
  };
  std::vector<CellResult> cells;
  std::vector<Task> tasks;
  for (Index m = m_range.first; m <= m_range.second; ++m)
    for (Index d = std::max(m, d_range.first); d <= d_range.second; ++d) {
      cells.push_back(CellResult{m, d, trials});
      for (int t = 0; t < trials; ++t) tasks.push_back({cells.size() - 1, t});
    }

  std::vector<TrialOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const CellResult& cell = cells[tasks[i].cell];
      outcomes[i] = run_trial(dict, cell.m, cell.d, tasks[i].trial, config);
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CellResult& cell = cells[tasks[i].cell];
    const TrialOutcome& o = outcomes[i];
    cell.successes += o.cls == Classification::success;
    cell.illcond += o.cls == Classification::illcond_failure;
    cell.mean_residual += o.residual / trials;
    cell.mean_iters += static_cast<double>(o.iterations) / trials;
  }
  return cells;
}

}  // namespace sigpath
