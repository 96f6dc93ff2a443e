/**
 * @file optimize.hpp
 * Unconstrained smooth minimization on R^n: BFGS with Armijo backtracking
 * and a trust-region method whose subproblem is solved by Steihaug-CG.
 *
 * An objective P provides
 *   double value(const Vec& x);
 *   double value_gradient(const Vec& x, Vec& g);   // returns value
 * and, for the trust-region method, a quadratic model of the Hessian:
 *   void update_model(const Vec& x);
 *   Vec  model_times(const Vec& v);
 */
#pragma once

#include "sigpath/tensor3.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

namespace sigpath {

template <class P>
concept Objective = requires(P& p, const Vec& x, Vec& g) {
  { p.value(x) } -> std::convertible_to<double>;
  { p.value_gradient(x, g) } -> std::convertible_to<double>;
};

template <class P>
concept ModelObjective = Objective<P> && requires(P& p, const Vec& x) {
  p.update_model(x);
  { p.model_times(x) } -> std::convertible_to<Vec>;
};

struct OptimResult {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;        // gradient tolerance reached
  std::vector<double> history;   // objective value after every accepted step
};

struct BfgsOptions {
  double grad_tol = 1e-10;
  int max_iter = 100;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

/// BFGS on a dense inverse-Hessian approximation with Armijo backtracking
/// from unit step. The objective never increases between accepted steps.
template <Objective P>
OptimResult bfgs_minimize(P& problem, Vec x, const BfgsOptions& opt = {}) {
  const Index n = x.size();
  Vec g(n);
  double f = problem.value_gradient(x, g);
  Mat h = Mat::Identity(n, n);
  bool fresh = true;  // h is still the initial identity

  OptimResult res;
  res.history.push_back(f);
  int it = 0;
  while (it < opt.max_iter && std::isfinite(f)) {
    if (g.norm() < opt.grad_tol) break;
    Vec p = -(h * g);
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      h.setIdentity();
      fresh = true;
      p = -g;
      slope = -g.squaredNorm();
    }

    double alpha = 1.0;
    Vec x_new;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = x + alpha * p;
      f_new = problem.value(x_new);
      if (std::isfinite(f_new) && f_new <= f + opt.armijo_c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opt.backtrack;
    }
    if (!accepted) {
      if (fresh) break;  // steepest descent made no progress either
      h.setIdentity();
      fresh = true;
      continue;
    }

    Vec g_new(n);
    f_new = problem.value_gradient(x_new, g_new);
    const Vec s = x_new - x;
    const Vec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Vec hy = h * y;
      // (I - rho s y^T) H (I - rho y s^T) + rho s s^T, expanded
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
      fresh = false;
    }
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    res.history.push_back(f);
    ++it;
  }
  res.x = std::move(x);
  res.value = f;
  res.grad_norm = g.norm();
  res.iterations = it;
  res.converged = res.grad_norm < opt.grad_tol;
  return res;
}

struct TrustRegionOptions {
  double grad_tol = 1e-10;
  int max_iter = 1000;
  double accept_ratio = 0.1;
  double shrink = 0.25;
  double expand = 2.0;
  double max_radius = 1e10;
};

namespace detail {

// tau >= 0 with ||z + tau d|| = radius
inline double to_boundary(const Vec& z, const Vec& d, double radius) {
  const double a = d.squaredNorm(), b = 2.0 * z.dot(d), c = z.squaredNorm() - radius * radius;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  return (-b + std::sqrt(disc)) / (2.0 * a);
}

}  // namespace detail

/// Steihaug truncated CG for min g.p + p.Bp/2 subject to ||p|| <= radius,
/// where B is applied through model_times.
template <ModelObjective P>
Vec steihaug_cg(P& problem, const Vec& g, double radius) {
  const Index n = g.size();
  const double gn = g.norm();
  const double eps = gn * std::min(0.5, std::sqrt(gn));
  Vec z = Vec::Zero(n);
  Vec r = g;
  Vec d = -r;
  if (gn == 0.0) return z;
  for (Index j = 0; j < 2 * n + 10; ++j) {
    const Vec bd = problem.model_times(d);
    const double dbd = d.dot(bd);
    if (!(dbd > 0.0)) return z + detail::to_boundary(z, d, radius) * d;
    const double rr = r.squaredNorm();
    const double alpha = rr / dbd;
    Vec z_next = z + alpha * d;
    if (z_next.norm() >= radius) return z + detail::to_boundary(z, d, radius) * d;
    r += alpha * bd;
    z = std::move(z_next);
    if (r.norm() < eps) return z;
    d = -r + (r.squaredNorm() / rr) * d;
  }
  return z;
}

/// Trust-region Newton-type method. Stops on the gradient tolerance, the
/// iteration cap, or when the radius collapses below round-off of x.
template <ModelObjective P>
OptimResult trust_region_minimize(P& problem, Vec x, const TrustRegionOptions& opt = {}) {
  const Index n = x.size();
  Vec g(n);
  double f = problem.value_gradient(x, g);
  double radius = std::max(1.0, x.norm());

  OptimResult res;
  res.history.push_back(f);
  int it = 0;
  while (it < opt.max_iter && std::isfinite(f)) {
    if (g.norm() < opt.grad_tol || f == 0.0) break;
    if (radius < 1e-15 * std::max(1.0, x.norm())) break;
    ++it;
    problem.update_model(x);
    const Vec p = steihaug_cg(problem, g, radius);
    const double predicted = -(g.dot(p) + 0.5 * p.dot(problem.model_times(p)));
    const Vec x_new = x + p;
    const double f_new = problem.value(x_new);
    const double rho = predicted > 0.0 ? (f - f_new) / predicted : -1.0;

    if (!std::isfinite(f_new) || rho < 0.25)
      radius = opt.shrink * std::min(radius, p.norm());
    else if (rho > 0.75 && p.norm() >= 0.99 * radius)
      radius = std::min(opt.expand * radius, opt.max_radius);

    if (std::isfinite(f_new) && rho > opt.accept_ratio && f_new <= f) {
      x = x_new;
      f = problem.value_gradient(x, g);
      res.history.push_back(f);
    }
  }
  res.x = std::move(x);
  res.value = f;
  res.grad_norm = g.norm();
  res.iterations = it;
  res.converged = res.grad_norm < opt.grad_tol;
  return res;
}

}  // namespace sigpath
