#include <gtest/gtest.h>

#include <cmath>

#include "conceptsig/error.hpp"
#include "conceptsig/projection.hpp"
#include "conceptsig/rng.hpp"
#include "conceptsig/signature.hpp"

using namespace conceptsig;

TEST(TargetDim, Arithmetic) {
  EXPECT_EQ(target_dim(1, 0.5, 1.0), 14);
  EXPECT_EQ(target_dim(2, 0.01, 0.5), 212);
  EXPECT_EQ(target_dim(1, 0.05, 0.5), static_cast<int>(std::ceil(8 * (1 + std::log(20.0)) / 0.25)));
  EXPECT_EQ(target_dim(1, 0.05, 0.5, 4.0), static_cast<int>(std::ceil(4 * (1 + std::log(20.0)) / 0.25)));
}

TEST(TargetDim, HalvingEpsQuadruples) {
  const double a = target_dim(50, 0.1, 0.2);
  const double b = target_dim(50, 0.1, 0.1);
  EXPECT_NEAR(b / a, 4.0, 1e-3);
}

TEST(TargetDim, Errors) {
  EXPECT_THROW(target_dim(0, 0.5, 0.5), InputError);
  EXPECT_THROW(target_dim(1, 0.0, 0.5), InputError);
  EXPECT_THROW(target_dim(1, 0.5, 1.5), InputError);
}

TEST(Projection, IdentityHookAndZero) {
  Rng rng(1);
  const PointCloud cloud(rng.normal_matrix(10, 4));
  const RandomProjection id = RandomProjection::identity(4);
  EXPECT_EQ(id.project(cloud).points, cloud.points);
  const RandomProjection p(4, 3, 9);
  EXPECT_EQ(p.apply(Eigen::Vector4d::Zero()), Eigen::Vector3d::Zero());
  EXPECT_THROW(p.apply(Eigen::Vector3d::Zero()), InputError);
  EXPECT_THROW(RandomProjection(3, 4, kIdentityProjectionSeed), InputError);
}

TEST(Projection, DeterministicPerSeed) {
  const RandomProjection a(20, 7, 42), b(20, 7, 42), c(20, 7, 43);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_NE(a.matrix(), c.matrix());
  EXPECT_EQ(RandomProjection(a.record()).matrix(), a.matrix());
}

TEST(Projection, NormPreservedInExpectation) {
  // E|Ax|^2 = |x|^2: average over many draws.
  Rng rng(2);
  const Eigen::VectorXd x = rng.normal_vector(30);
  double sum = 0.0;
  const int draws = 400;
  for (int s = 0; s < draws; ++s) sum += RandomProjection(30, 10, 1000 + s).apply(x).squaredNorm();
  // Var(|Ax|^2 / |x|^2) = 2 / out_dim, so the standard error is sqrt(0.2 / draws).
  EXPECT_NEAR(sum / draws / x.squaredNorm(), 1.0, 4 * std::sqrt(0.2 / draws));
}

TEST(Projection, CurveDistancesPreserved) {
  // 200 samples from a helix-like curve in R^50 projected to m = 20.
  Rng rng(3);
  const Eigen::MatrixXd dirs = rng.normal_matrix(50, 3);
  Eigen::MatrixXd pts(200, 50);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(0, 6.28);
    pts.row(i) = (dirs.col(0) * std::cos(t) + dirs.col(1) * std::sin(t) + dirs.col(2) * t * 0.3).transpose();
  }
  const PointCloud cloud(pts);
  int ok_seeds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud img = RandomProjection(50, 20, seed).project(cloud);
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i)
      for (int j = i + 1; j < 200 && ok; ++j) {
        const double r = (img.points.row(i) - img.points.row(j)).norm() /
                         (pts.row(i) - pts.row(j)).norm();
        ok = r > 0.5 && r < 1.5;
      }
    ok_seeds += ok;
  }
  EXPECT_GE(ok_seeds, 19);
}

TEST(Projection, FitRecordsAndAppliesProjection) {
  Rng rng(4);
  const Eigen::MatrixXd basis = rng.normal_matrix(30, 1);
  Eigen::MatrixXd pts(40, 30);
  for (int i = 0; i < 40; ++i) pts.row(i) = (basis * rng.uniform(-1, 1)).transpose();
  FitConfig cfg;
  cfg.degree = 1;
  cfg.projection = ProjectionConfig{8, 77};
  const Signature sig = fit(PointCloud(pts), cfg);
  ASSERT_TRUE(sig.projection.has_value());
  EXPECT_EQ(sig.projection->in_dim, 30);
  EXPECT_EQ(sig.projection->out_dim, 8);
  EXPECT_EQ(sig.input_dim(), 30);
  EXPECT_EQ(sig.basis.dim(), 8);
  EXPECT_LE(membership_score(sig, (basis * 0.37).col(0)), 1e-10);
  EXPECT_GE(membership_score(sig, rng.normal_vector(30)), 1e-2);
}
