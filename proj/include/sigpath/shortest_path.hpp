/**
 * @file shortest_path.hpp
 * Shortest piecewise-linear path with a prescribed third signature.
 *
 * The length of the m-step path with step matrix X is the sum of its column
 * norms. We minimize lambda^{-1} len(X) + g(X) for lambda = lambda0,
 * 2 lambda0, 4 lambda0, ..., warm-starting every solve from the previous
 * optimum, until the length term no longer matters; a final solve on g
 * alone removes the remaining bias.
 */
#pragma once

#include "sigpath/recovery.hpp"
#include "sigpath/signatures.hpp"
#include "sigpath/tensor3.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace sigpath {

/// Sum of Euclidean column norms.
inline double path_length(const Mat& x) {
  double len = 0.0;
  for (Index j = 0; j < x.cols(); ++j) len += x.col(j).norm();
  return len;
}

/// Sum of sqrt(||x_j||^2 + eps^2) - eps; differentiable at zero columns and
/// within m * eps of path_length.
inline double smoothed_length(const Mat& x, double eps) {
  double len = 0.0;
  for (Index j = 0; j < x.cols(); ++j) len += std::sqrt(x.col(j).squaredNorm() + eps * eps) - eps;
  return len;
}

inline Mat smoothed_length_gradient(const Mat& x, double eps) {
  Mat g(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    g.col(j) = x.col(j) / std::sqrt(x.col(j).squaredNorm() + eps * eps);
  return g;
}

/// lambda^{-1} len_eps(X) + g(X) with a Gauss-Newton plus exact
/// length-Hessian model.
class RegularizedFit {
 public:
  RegularizedFit(const Tensor3& core, const Tensor3& target, double lambda, double eps)
      : fit_(core, target), inv_lambda_(1.0 / lambda), eps_(eps) {}

  double value(const Vec& v) const {
    return inv_lambda_ * smoothed_length(unflat(v, fit_.rows(), fit_.cols()), eps_) + fit_.value(v);
  }

  double value_gradient(const Vec& v, Vec& g) const {
    const Mat x = unflat(v, fit_.rows(), fit_.cols());
    const double f = fit_.value_gradient(v, g);
    g += inv_lambda_ * flat(smoothed_length_gradient(x, eps_));
    return f + inv_lambda_ * smoothed_length(x, eps_);
  }

  void update_model(const Vec& v) {
    fit_.update_model(v);
    x_ = unflat(v, fit_.rows(), fit_.cols());
  }

  Vec model_times(const Vec& p) const {
    Vec out = fit_.model_times(p);
    const Mat dir = unflat(p, fit_.rows(), fit_.cols());
    Mat h(dir.rows(), dir.cols());
    for (Index j = 0; j < x_.cols(); ++j) {
      const double r = std::sqrt(x_.col(j).squaredNorm() + eps_ * eps_);
      const double xd = x_.col(j).dot(dir.col(j));
      h.col(j) = dir.col(j) / r - x_.col(j) * (xd / (r * r * r));
    }
    return out + inv_lambda_ * flat(h);
  }

 private:
  SignatureFit fit_;
  double inv_lambda_, eps_;
  Mat x_;
};

inline double regularized_cost(const Tensor3& c, const Tensor3& s, const Mat& x, double lambda,
                               double eps = 1e-9) {
  return smoothed_length(x, eps) / lambda + cost(c, s, x);
}

inline Mat regularized_grad(const Tensor3& c, const Tensor3& s, const Mat& x, double lambda,
                            double eps = 1e-9) {
  return grad_cost(c, s, x) + smoothed_length_gradient(x, eps) / lambda;
}

struct ContinuationConfig {
  double lambda0 = 1.0;
  double lambda_max = 1073741824.0;  // 2^30
  double lambda_cap = 1152921504606846976.0;  // 2^60, give up doubling here
  double smooth_eps = 1e-9;
  double residual_tol = 1e-10;  // relative to max(1, ||S||)
  int starts = 1;               // independent random starts
  RecoveryConfig inner;         // grad_tol, max_bfgs, max_tr, seed, init_scale

  void validate() const {
    if (!(lambda0 > 0.0)) throw std::invalid_argument("ContinuationConfig: lambda0 must be > 0");
    if (!(lambda_max > lambda0))
      throw std::invalid_argument("ContinuationConfig: lambda_max must exceed lambda0");
    if (starts < 1) throw std::invalid_argument("ContinuationConfig: starts must be >= 1");
    inner.validate();
  }
};

struct ShortestResult {
  Mat x;
  double length = 0.0;
  double residual = 0.0;  // ||[[C; X, X, X]] - S||
  bool reached = false;   // residual below residual_tol * max(1, ||S||)
  double final_lambda = 0.0;
  int stages = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline OptimResult two_stage(auto& problem, const Vec& x0, const RecoveryConfig& cfg) {
  BfgsOptions bo;
  bo.grad_tol = cfg.grad_tol;
  bo.max_iter = cfg.max_bfgs;
  OptimResult r1 = bfgs_minimize(problem, x0, bo);
  TrustRegionOptions to;
  to.grad_tol = cfg.grad_tol;
  to.max_iter = cfg.max_tr;
  return trust_region_minimize(problem, r1.x, to);
}

}  // namespace detail

/// Continuation from one starting matrix.
inline ShortestResult shortest_from(const Tensor3& c, const Tensor3& s, const Mat& x0,
                                    const ContinuationConfig& config) {
  const Index d = s.dim(0), m = c.dim(0);
  const double target = config.residual_tol * std::max(1.0, frobenius(s));
  Vec v = flat(x0);
  double lambda = config.lambda0;
  ShortestResult res;
  for (;;) {
    RegularizedFit fit(c, s, lambda, config.smooth_eps);
    v = detail::two_stage(fit, v, config.inner).x;
    ++res.stages;
    const double r = std::sqrt(cost(c, s, unflat(v, d, m)));
    if (lambda >= config.lambda_max && (r < target || lambda >= config.lambda_cap)) break;
    lambda *= 2.0;
  }
  res.final_lambda = lambda;

  SignatureFit plain(c, s);
  TrustRegionOptions to;
  to.grad_tol = config.inner.grad_tol;
  to.max_iter = config.inner.max_tr;
  const OptimResult polished = trust_region_minimize(plain, v, to);
  if (polished.value <= plain.value(v)) v = polished.x;

  res.x = unflat(v, d, m);
  res.length = path_length(res.x);
  res.residual = std::sqrt(cost(c, s, res.x));
  res.reached = res.residual < target;
  return res;
}

/// Shortest path with `c.dim(0)` steps (c is normally core_axis(m)) whose
/// third signature is S. Over several starts, the shortest path that reaches
/// the residual target wins; if none does, the smallest residual wins.
inline ShortestResult shortest(const Tensor3& c, const Tensor3& s, const ContinuationConfig& config) {
  config.validate();
  if (!c.is_cubical() || !s.is_cubical()) throw DimensionError("shortest: tensors must be cubical");
  const Index d = s.dim(0), m = c.dim(0);

  std::vector<std::string> warnings;
  if (m * d < universal_dimension(d))
    warnings.push_back("m*d = " + std::to_string(m * d) + " is below dim U_{d,3} = " +
                       std::to_string(universal_dimension(d)) +
                       "; an exact match is generically impossible");

  ShortestResult best;
  bool have = false;
  for (int st = 0; st < config.starts; ++st) {
    Rng rng(stream_seed(config.inner.seed, {0x73686f72ULL, static_cast<std::uint64_t>(st)}));
    ShortestResult r = shortest_from(c, s, random_normal(d, m, rng, config.inner.init_scale), config);
    const bool better = !have || (r.reached && !best.reached) ||
                        (r.reached == best.reached &&
                         (r.reached ? r.length < best.length : r.residual < best.residual));
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  best.warnings = std::move(warnings);
  if (!best.reached)
    best.warnings.push_back("residual floor not reached; try more steps or more starts");
  return best;
}

/// Piecewise-linear core with m_steps steps.
inline ShortestResult shortest(const Tensor3& s, Index m_steps, const ContinuationConfig& config) {
  return shortest(core_axis(m_steps), s, config);
}

// ---------------------------------------------------------------------------
// Export

enum class PathFormat { csv, json, svg };

/// Vertices of the path: origin followed by partial sums of the columns,
/// one vertex per column of the returned d x (m+1) matrix.
inline Mat path_vertices(const Mat& x) {
  Mat v = Mat::Zero(x.rows(), x.cols() + 1);
  for (Index j = 0; j < x.cols(); ++j) v.col(j + 1) = v.col(j) + x.col(j);
  return v;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// one polyline panel for the coordinate pair (a, b), placed at x offset `left`
inline std::string svg_panel(const Mat& verts, Index a, Index b, double left, double size) {
  double lo_x = verts.row(a).minCoeff(), hi_x = verts.row(a).maxCoeff();
  double lo_y = verts.row(b).minCoeff(), hi_y = verts.row(b).maxCoeff();
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 0.05 * span;
  const double scale = size / (span + 2 * margin);
  std::ostringstream os;
  os << "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (Index j = 0; j < verts.cols(); ++j) {
    const double px = left + (verts(a, j) - lo_x + margin) * scale;
    const double py = size - (verts(b, j) - lo_y + margin) * scale;  // y axis up
    os << (j ? " " : "") << fmt(px) << ',' << fmt(py);
  }
  os << "\"/>\n";
  return os.str();
}

}  // namespace detail

/// Render the vertex list as CSV, JSON or SVG. SVG needs d = 2, or d = 3 for
/// three coordinate-plane projections side by side.
inline std::string export_path(const Mat& x, PathFormat format) {
  const Mat verts = path_vertices(x);
  const Index d = x.rows();
  switch (format) {
    case PathFormat::csv: {
      std::ostringstream os;
      for (Index i = 0; i < d; ++i) os << (i ? "," : "") << 'x' << (i + 1);
      os << '\n';
      for (Index j = 0; j < verts.cols(); ++j) {
        for (Index i = 0; i < d; ++i) os << (i ? "," : "") << detail::fmt(verts(i, j));
        os << '\n';
      }
      return os.str();
    }
    case PathFormat::json: {
      nlohmann::json vs = nlohmann::json::array();
      for (Index j = 0; j < verts.cols(); ++j) {
        nlohmann::json p = nlohmann::json::array();
        for (Index i = 0; i < d; ++i) p.push_back(verts(i, j));
        vs.push_back(p);
      }
      return nlohmann::json{{"dim", d}, {"vertices", vs}}.dump() + "\n";
    }
    case PathFormat::svg: {
      constexpr double size = 400.0;
      std::vector<std::pair<Index, Index>> panels;
      if (d == 2)
        panels = {{0, 1}};
      else if (d == 3)
        panels = {{0, 1}, {0, 2}, {1, 2}};
      else
        throw std::invalid_argument("export_path: SVG needs a path in dimension 2 or 3");
      std::ostringstream os;
      const double width = size * static_cast<double>(panels.size());
      os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << detail::fmt(width) << ' '
         << detail::fmt(size) << "\" width=\"" << detail::fmt(width) << "\" height=\""
         << detail::fmt(size) << "\">\n";
      for (std::size_t p = 0; p < panels.size(); ++p)
        os << detail::svg_panel(verts, panels[p].first, panels[p].second,
                                size * static_cast<double>(p), size);
      os << "</svg>\n";
      return os.str();
    }
  }
  return {};
}

}  // namespace sigpath
