#include "sigpath/random.hpp"
#include "sigpath/shortest_path.hpp"
#include "sigpath/signatures.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>

using namespace sigpath;

TEST(Length, Examples) {
  Mat x(2, 3);
  x << 3, 0, -1,  //
      4, 2, 0;
  EXPECT_DOUBLE_EQ(path_length(x), 5.0 + 2.0 + 1.0);
  EXPECT_EQ(path_length(Mat::Zero(3, 4)), 0.0);
  EXPECT_EQ(smoothed_length(Mat::Zero(3, 4), 1e-9), 0.0);
}

TEST(Length, SmoothingBound) {
  Rng rng(50);
  for (int t = 0; t < 20; ++t) {
    const Mat x = random_normal(3, 5, rng) * (t % 2 ? 1.0 : 1e-6);
    for (double eps : {1e-9, 1e-3, 0.5}) {
      const double gap = path_length(x) - smoothed_length(x, eps);
      EXPECT_GE(gap, -1e-15);
      EXPECT_LE(gap, 5 * eps + 1e-14 * std::max(1.0, path_length(x)));
    }
  }
}

TEST(Length, GradientOfSmoothedLength) {
  Rng rng(51);
  const Mat x = random_normal(3, 4, rng);
  const Mat g = smoothed_length_gradient(x, 1e-3);
  for (Index j = 0; j < 4; ++j) EXPECT_LT((g.col(j) - x.col(j) / std::sqrt(x.col(j).squaredNorm() + 1e-6)).norm(), 1e-15);
  // bounded by 1 per column, zero at a zero column
  Mat z = x;
  z.col(1).setZero();
  EXPECT_EQ(smoothed_length_gradient(z, 1e-9).col(1).norm(), 0.0);
}

TEST(Regularized, GradientMatchesCentralDifferences) {
  Rng rng(52);
  for (int t = 0; t < 10; ++t) {
    const Tensor3 c = core_axis(3);
    const Tensor3 s = random_tensor(2, 2, 2, rng);
    const Mat x = random_normal(2, 3, rng);
    const double lambda = 0.5 + t;
    const double eps = 1e-3;
    const Mat g = regularized_grad(c, s, x, lambda, eps);
    Mat fd(2, 3);
    const double h = 1e-6;
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 3; ++j) {
        Mat p = x, q = x;
        p(i, j) += h;
        q(i, j) -= h;
        fd(i, j) = (regularized_cost(c, s, p, lambda, eps) - regularized_cost(c, s, q, lambda, eps)) / (2 * h);
      }
    EXPECT_LT((g - fd).norm(), 1e-6 * std::max(1.0, fd.norm())) << t;
  }
}

TEST(Regularized, ObjectiveAgreesWithFreeFunctions) {
  Rng rng(53);
  const Tensor3 c = core_axis(3);
  const Tensor3 s = random_tensor(2, 2, 2, rng);
  const Mat x = random_normal(2, 3, rng);
  RegularizedFit fit(c, s, 4.0, 1e-9);
  Vec g;
  const double f = fit.value_gradient(flat(x), g);
  EXPECT_NEAR(f, regularized_cost(c, s, x, 4.0), 1e-12);
  EXPECT_LT((unflat(g, 2, 3) - regularized_grad(c, s, x, 4.0)).norm(), 1e-12);
}

TEST(Regularized, ModelMatchesHessianOfLengthTerm) {
  // with S = [[C; X]] the Gauss-Newton part is exact at X, so the model is the full Hessian
  Rng rng(54);
  const Tensor3 c = core_axis(3);
  const Mat x = random_normal(2, 3, rng);
  const Tensor3 s = congruence(c, x);
  RegularizedFit fit(c, s, 0.7, 1e-2);
  fit.update_model(flat(x));
  const Vec p = flat(random_normal(2, 3, rng));
  Vec gp, gm;
  const double h = 1e-6;
  fit.value_gradient(flat(x) + h * p, gp);
  fit.value_gradient(flat(x) - h * p, gm);
  const Vec fd = (gp - gm) / (2 * h);
  EXPECT_LT((fit.model_times(p) - fd).norm(), 1e-5 * std::max(1.0, fd.norm()));
}

TEST(Shortest, SingleStepTarget) {
  // S is the signature of one straight step y; the shortest path is that step
  Vec y(2);
  y << 1.0, 2.0;
  const Tensor3 s = (1.0 / 6.0) * Tensor3::outer(y, y, y);
  ContinuationConfig cfg;
  cfg.starts = 3;
  cfg.inner.max_tr = 200;
  const ShortestResult r = shortest(s, 3, cfg);
  EXPECT_TRUE(r.reached);
  EXPECT_NEAR(r.length, y.norm(), 1e-4);
  EXPECT_LT((path_vertices(r.x).col(3) - y).norm(), 1e-4);
}

TEST(Shortest, WarnsWhenUnderdetermined) {
  Rng rng(55);
  const Tensor3 s = sig_pl(PathPL{random_normal(3, 6, rng)}).sig3;
  ContinuationConfig cfg;
  cfg.inner.max_tr = 30;
  cfg.lambda_max = 8.0;
  cfg.lambda_cap = 16.0;
  const ShortestResult r = shortest(s, 2, cfg);  // 2 * 3 < 14
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("below"), std::string::npos);
}

TEST(Shortest, ConfigValidation) {
  ContinuationConfig cfg;
  cfg.lambda0 = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.starts = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.lambda_max = 0.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Export, VerticesArePartialSums) {
  Mat y(2, 13);
  y << 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1,  //
      0, 1, 0, -1, 0, 2, 0, -2, 0, 1, 0, -1, 0;
  const Mat v = path_vertices(y);
  EXPECT_EQ(v.cols(), 14);
  EXPECT_EQ(v.col(0).norm(), 0.0);
  EXPECT_EQ(v(0, 13), 7.0);
  EXPECT_EQ(v(1, 13), 0.0);
  EXPECT_EQ(v(1, 6), 2.0);

  // Klee-Minty walk visits every vertex of the unit cube and ends at e3
  Mat km(3, 7);
  km << 1, 0, -1, 0, 1, 0, -1,  //
      0, 1, 0, 0, 0, -1, 0,     //
      0, 0, 0, 1, 0, 0, 0;
  const Mat w = path_vertices(km);
  EXPECT_EQ(w.col(7), Vec::Unit(3, 2));
  std::set<std::array<int, 3>> seen;
  for (Index j = 0; j < 8; ++j) seen.insert({int(w(0, j)), int(w(1, j)), int(w(2, j))});
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Export, Formats) {
  Mat y(2, 2);
  y << 1, 0,  //
      0, 1;
  const std::string csv = export_path(y, PathFormat::csv);
  EXPECT_EQ(csv, "x1,x2\n0,0\n1,0\n1,1\n");
  const auto j = nlohmann::json::parse(export_path(y, PathFormat::json));
  EXPECT_EQ(j["dim"], 2);
  ASSERT_EQ(j["vertices"].size(), 3u);
  EXPECT_EQ(j["vertices"][2][1], 1.0);
  const std::string svg = export_path(y, PathFormat::svg);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
  Mat y3 = Mat::Identity(3, 3);
  const std::string svg3 = export_path(y3, PathFormat::svg);
  std::size_t count = 0;
  for (std::size_t p = svg3.find("polyline"); p != std::string::npos; p = svg3.find("polyline", p + 1)) ++count;
  EXPECT_EQ(count, 3u);
  EXPECT_THROW(export_path(Mat::Identity(4, 4), PathFormat::svg), std::invalid_argument);
}
