#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conceptsig/algebra.hpp"
#include "conceptsig/error.hpp"
#include "conceptsig/generators.hpp"
#include "conceptsig/hierarchy.hpp"
#include "conceptsig/rng.hpp"

using namespace conceptsig;

namespace {

constexpr double kPi = std::numbers::pi;

PointCloud circle(double r, int n, std::uint64_t seed) {
  return sample(ManifoldSpec{CircleSpec{Eigen::Vector2d::Zero(), r}}, n, seed);
}

PointCloud ellipse(double a, double b, int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = rng.uniform(0, 2 * kPi);
    pts.row(i) << a * std::cos(t) + 0.3, b * std::sin(t) - 0.2;
  }
  return PointCloud(pts);
}

}  // namespace

TEST(Flatten, HandValueAndRoundTrip) {
  EXPECT_EQ(flatten_matrix(Eigen::Matrix2d::Identity()), Eigen::Vector3d(1, 0, 1));
  Eigen::Matrix3d m;
  m << 1, 2, 3, 2, 4, 5, 3, 5, 6;
  Eigen::VectorXd expect(6);
  expect << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(flatten_matrix(m), expect);
  Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd a = rng.normal_matrix(5, 5);
    const Eigen::MatrixXd s = a + a.transpose();
    EXPECT_EQ(reconstruct_matrix(flatten_matrix(s)), s);
  }
  EXPECT_THROW(reconstruct_matrix(Eigen::VectorXd::Zero(4)), InputError);
}

TEST(Flatten, DistinctCirclesDistinctFlats) {
  const Signature a = fit(circle(1.0, 40, 2), FitConfig{});
  const Signature b = fit(circle(2.0, 40, 3), FitConfig{});
  EXPECT_GT((flatten(a) - flatten(b)).norm(), 1e-3);
  const Eigen::VectorXd fc = flatten(a, FlatSource::kComplement);
  EXPECT_LE((reconstruct_matrix(fc) - complement(a)).norm(), 1e-12);
}

TEST(Level2, ConcentricCircles) {
  std::vector<Signature> sigs;
  for (int i = 0; i < 8; ++i) sigs.push_back(fit(circle(0.5 + 1.5 * i / 7.0, 40, 10 + i), FitConfig{}));
  const Level2Config cfg;
  const Signature level2 = signature_of_signatures(sigs, cfg);
  const Signature held = fit(circle(1.2, 40, 30), FitConfig{});
  Eigen::MatrixXd line(30, 2);
  for (int i = 0; i < 30; ++i) line.row(i) << i / 15.0 - 1.0, 0.5 * (i / 15.0 - 1.0) + 0.1;
  const Signature other = fit(PointCloud(line), FitConfig{});
  const double member = level2_score(level2, held, cfg);
  const double outsider = level2_score(level2, other, cfg);
  EXPECT_LE(member, 1e-6);
  EXPECT_GE(outsider, 1e-2);
}

TEST(Level2, RepeatedSignatureMemorizes) {
  const Signature a = fit(circle(1.0, 40, 4), FitConfig{});
  Level2Config cfg;
  cfg.projection_dim = 1000;  // no projection
  const Signature level2 = signature_of_signatures({a, a, a}, cfg);
  // One point: the moment has rank 1, so everything else is null.
  EXPECT_EQ(level2.null_rank, static_cast<int>(level2.feature_dim()) - 1);
  EXPECT_LE(level2_score(level2, a, cfg), 1e-12);
}

TEST(Level2, RectangleParts) {
  const ManifoldSpec rect = rectangle(Eigen::Vector2d::Zero(), 2.0, 1.0);
  std::vector<Signature> parts;
  std::uint64_t seed = 5;
  for (const auto& p : std::get<UnionSpec>(rect.shape).parts) parts.push_back(fit(sample(p, 30, seed++), FitConfig{}));
  Level2Config cfg;
  cfg.degree = 1;
  const Signature level2 = signature_of_signatures(parts, cfg);
  for (const auto& p : parts) EXPECT_LE(level2_score(level2, p, cfg), 1e-8);
  const Signature unrelated =
      fit(sample(ManifoldSpec{SegmentSpec{Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)}}, 30, 9), FitConfig{});
  EXPECT_GE(level2_score(level2, unrelated, cfg), 1e-2);
}

TEST(Moments, RotationMapHandValue) {
  PlanarMoments m;
  m << 1, 0, 1, 0, 0;
  PlanarMoments expect;
  expect << 0, -1, 0, 1, 0;
  EXPECT_LE((moment_rotation_map(m, kPi / 2) - expect).norm(), 1e-15);
  EXPECT_EQ(moment_rotation_map(m, 0.0), m);
}

TEST(Moments, RotationMapMatchesBruteForce) {
  const PointCloud base = ellipse(1.0, 0.6, 50, 6);
  const PlanarMoments m = planar_moments(base);
  for (double theta : {-1.3, -0.2, 0.37, 2.5}) {
    const PlanarMoments direct = planar_moments(rotate_cloud(base, theta));
    EXPECT_LE((moment_rotation_map(m, theta) - direct).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Moments, TaylorTermsAreDerivatives) {
  const PointCloud base = ellipse(1.0, 0.6, 50, 7);
  const PlanarMoments m = planar_moments(base);
  const double h = 1e-4;
  const PlanarMoments fd1 = (moment_rotation_map(m, h) - moment_rotation_map(m, -h)) / (2 * h);
  const PlanarMoments fd2 =
      (moment_rotation_map(m, h) - 2 * m + moment_rotation_map(m, -h)) / (h * h);
  EXPECT_LE((rotation_a1(m) - fd1).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LE((rotation_a2(m) - fd2).cwiseAbs().maxCoeff(), 1e-5);
  for (double theta : {0.1, -0.3, 0.3}) {
    const double err = (moment_rotation_map(m, theta, MapMode::kApproximate) - moment_rotation_map(m, theta))
                           .cwiseAbs()
                           .maxCoeff();
    EXPECT_LE(err, 2 * std::pow(std::abs(theta), 3));
  }
}

TEST(Moments, TranslationMap) {
  PlanarMoments m;
  m << 2, 0, 5, 0, 0;
  EXPECT_NEAR(moment_translation_map(m, 1, 0)(2), 10.0, 1e-15);
  EXPECT_EQ(moment_translation_map(m, 0, 0), m);
  const PointCloud base = ellipse(1.0, 0.6, 50, 8);
  const PlanarMoments pm = planar_moments(base);
  const double u = 0.3, v = -0.7;
  const PlanarMoments exact = moment_translation_map(pm, u, v);
  EXPECT_LE((exact - planar_moments(translate_cloud(base, u, v))).cwiseAbs().maxCoeff(), 1e-12);
  PlanarMoments remainder;
  remainder << 0, 0, u * u, v * v, u * v;
  EXPECT_LE((exact - moment_translation_map(pm, u, v, MapMode::kApproximate) - remainder).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(Rotation, SeparatesSameAndDifferentObject) {
  const PointCloud base = ellipse(1.0, 0.6, 60, 9);
  std::vector<double> thetas;
  for (int i = 0; i < 16; ++i) thetas.push_back(kPi * i / 16.0);
  const RotationConcept rc = rotation_invariant_signature(base, thetas, FitConfig{}, Level2Config{});
  const double same = rotation_score(rc, rotate_cloud(base, 0.37));
  const double other = rotation_score(rc, rotate_cloud(ellipse(1.0, 0.8, 60, 10), 0.37));
  EXPECT_LE(same, 1e-5);
  EXPECT_GE(other, 1e-4);

  std::vector<double> shuffled(thetas.rbegin(), thetas.rend());
  const RotationConcept again = rotation_invariant_signature(base, shuffled, FitConfig{}, Level2Config{});
  EXPECT_LE((again.level2.null_projector - rc.level2.null_projector).norm(), 1e-8);
  EXPECT_THROW(rotation_invariant_signature(base, {0.0, 1.0}, FitConfig{}, Level2Config{}), InputError);
}

TEST(Velocity, SubsetChecks) {
  FitConfig lin;
  lin.degree = 1;
  lin.include_constant = false;
  auto traj = [&](const Eigen::Vector3d& start, const Eigen::Vector3d& vel) {
    return fit(trajectory_cloud({start}, {vel}, 6).front(), lin);
  };
  const Eigen::Vector3d v(1, 0, 0);
  const Signature a = traj(Eigen::Vector3d(0, 0, 0), v);
  const Signature b = traj(Eigen::Vector3d(0, 1, 0), v);
  const Signature vel = velocity_signature({a, b});
  EXPECT_NEAR(complement(vel).trace(), 1.0, 1e-8);
  // The velocity direction in the 1-appended coordinates is (1, 0, 0, 0).
  EXPECT_NEAR(complement(vel)(0, 0), 1.0, 1e-8);
  EXPECT_LE((complement(velocity_signature({b, a})) - complement(vel)).norm(), 1e-8);
  EXPECT_TRUE(subset_check(traj(Eigen::Vector3d(0, 0, 2), v), vel));
  EXPECT_FALSE(subset_check(traj(Eigen::Vector3d(0, 0, 2), Eigen::Vector3d(0, 1, 0)), vel));
  const Signature third = velocity_signature({a, b, traj(Eigen::Vector3d(1, 1, 1), v)});
  EXPECT_LE((complement(third) - complement(vel)).norm(), 1e-8);
  EXPECT_THROW(velocity_signature({a}), InputError);
}
