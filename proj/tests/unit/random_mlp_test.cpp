#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "conceptsig/error.hpp"
#include "conceptsig/random_mlp.hpp"
#include "conceptsig/rng.hpp"

using namespace conceptsig;

namespace {

// Isserlis: sum over perfect matchings of prod delta(i_a, i_b).
double matching_sum(std::vector<int> idx) {
  if (idx.empty()) return 1.0;
  if (idx.size() % 2) return 0.0;
  const int first = idx[0];
  double total = 0.0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    if (idx[j] != first) continue;
    std::vector<int> rest;
    for (std::size_t k = 1; k < idx.size(); ++k)
      if (k != j) rest.push_back(idx[k]);
    total += matching_sum(rest);
  }
  return total;
}

Eigen::MatrixXd random_psd(Rng& rng, int d) {
  const Eigen::MatrixXd a = rng.normal_matrix(d, d);
  return a * a.transpose() / d;
}

// Closed forms from Stein's lemma.
Eigen::MatrixXd stein_rrt_g1(const Eigen::MatrixXd& m) {
  return 2 * m + m.trace() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}
Eigen::MatrixXd stein_rrt_g2(const Eigen::MatrixXd& m) {
  const double t = m.trace(), s = (m * m).trace();
  return (t * t + 2 * s) * Eigen::MatrixXd::Identity(m.rows(), m.cols()) + 4 * t * m + 8 * m * m;
}

double rel(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  return (est - truth).norm() / truth.norm();
}

}  // namespace

TEST(Wick, GaussianMomentMatchesMatchings) {
  EXPECT_EQ(wick::gaussian_moment({0, 0, 0, 0}), 3.0);
  EXPECT_EQ(wick::gaussian_moment({0, 0, 0, 0, 0, 0}), 15.0);
  EXPECT_EQ(wick::gaussian_moment({0, 1}), 0.0);
  EXPECT_EQ(wick::gaussian_moment({}), 1.0);
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> idx(static_cast<std::size_t>(2 * (1 + rng.uniform_index(3))));
    for (auto& i : idx) i = static_cast<int>(rng.uniform_index(3));
    EXPECT_EQ(wick::gaussian_moment(idx), matching_sum(idx));
  }
}

TEST(Wick, ExpectationsMatchSteinClosedForms) {
  Rng rng(2);
  for (int d : {1, 2, 3, 4}) {
    const Eigen::MatrixXd m = random_psd(rng, d);
    EXPECT_LE((wick::rrt_g1(m) - stein_rrt_g1(m)).norm(), 1e-12 * stein_rrt_g1(m).norm());
    EXPECT_LE((wick::rrt_g2(m) - stein_rrt_g2(m)).norm(), 1e-12 * stein_rrt_g2(m).norm());
    EXPECT_NEAR(wick::g1(m), m.trace(), 1e-12);
    EXPECT_NEAR(wick::g2(m), m.trace() * m.trace() + 2 * (m * m).trace(), 1e-10);
  }
  // d = 1, M = 1: E[r^4] = 3 and E[r^6] = 15.
  EXPECT_NEAR(wick::rrt_g1(Eigen::MatrixXd::Ones(1, 1))(0, 0), 3.0, 1e-15);
  EXPECT_NEAR(wick::rrt_g2(Eigen::MatrixXd::Ones(1, 1))(0, 0), 15.0, 1e-15);
}

TEST(Calibrate, MatchesClosedFormCoefficients) {
  // For d <= 2 the regressors are linearly dependent (Cayley-Hamilton), so only d >= 3 pins them.
  for (int d : {3, 5}) {
    const MlpCalibration c = calibrate(d, 3);
    EXPECT_NEAR(c.a1, 0.5, 1e-10);
    EXPECT_NEAR(c.a2, -0.5, 1e-10);
    EXPECT_NEAR(c.b1, 0.125, 1e-10);
    EXPECT_NEAR(c.b2, -0.25, 1e-10);
    EXPECT_NEAR(c.b3, 0.25, 1e-10);
    EXPECT_NEAR(c.b4, -0.125, 1e-10);
    EXPECT_LE(c.stage1_residual, 1e-6);
    EXPECT_LE(c.stage2_residual, 1e-6);
  }
}

TEST(Calibrate, LowDimensionStillReconstructs) {
  Rng rng(13);
  for (int d : {1, 2}) {
    const MlpCalibration c = calibrate(d, 3);
    EXPECT_LE(c.stage1_residual, 1e-6);
    EXPECT_LE(c.stage2_residual, 1e-6);
    const Eigen::MatrixXd m = random_psd(rng, d);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd rec1 = c.a1 * wick::rrt_g1(m) + c.a2 * wick::g1(m) * id;
    EXPECT_LE((rec1 - m).norm(), 1e-8 * m.norm());
    const Eigen::MatrixXd rec2 = c.b1 * wick::rrt_g2(m) + c.b2 * wick::g1(m) * wick::rrt_g1(m) +
                                 c.b3 * wick::g1(m) * wick::g1(m) * id + c.b4 * wick::g2(m) * id;
    EXPECT_LE((rec2 - m * m).norm(), 1e-8 * (m * m).norm());
  }
}

TEST(Calibrate, ExactRecoveryOnDiagonal) {
  // M = diag(2, 1): the formulas applied to exact expectations give M and M^2 back.
  const MlpCalibration c = calibrate(2, 4);
  Eigen::MatrixXd m = Eigen::Vector2d(2, 1).asDiagonal();
  const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd rec1 = c.a1 * wick::rrt_g1(m) + c.a2 * wick::g1(m) * i2;
  EXPECT_LE((rec1 - m).norm(), 1e-8);
  const Eigen::MatrixXd rec2 = c.b1 * wick::rrt_g2(m) + c.b2 * wick::g1(m) * wick::rrt_g1(m) +
                               c.b3 * wick::g1(m) * wick::g1(m) * i2 + c.b4 * wick::g2(m) * i2;
  EXPECT_LE((rec2 - m * m).norm(), 1e-8);
  EXPECT_THROW(calibrate(0), InputError);
}

TEST(RandomMLP, G1HatIsQuadraticForm) {
  RandomMLP unit(2, 1, 0);
  Eigen::MatrixXd e1(1, 2);
  e1 << 1, 0;
  const double r0 = unit.weights()(0, 0);
  EXPECT_NEAR(unit.g1_hat(PointCloud(e1))(0), r0 * r0, 1e-15);

  Rng rng(5);
  const PointCloud cloud(rng.normal_matrix(50, 4));
  RandomMLP net(4, 100, 6);
  const Eigen::MatrixXd m = raw_moment(cloud);
  const Eigen::VectorXd g = net.g1_hat(cloud);
  for (int j = 0; j < 100; ++j) {
    const Eigen::VectorXd r = net.weights().row(j).transpose();
    EXPECT_NEAR(g(j), r.dot(m * r), 1e-12 * (1 + std::abs(g(j))));
  }
  EXPECT_NEAR(raw_moment(cloud)(0, 1), cloud.points.col(0).dot(cloud.points.col(1)) / 50, 1e-14);
}

TEST(RandomMLP, RequiresCalibration) {
  RandomMLP net(3, 10, 0);
  const PointCloud cloud(Eigen::MatrixXd::Ones(2, 3));
  EXPECT_THROW(net.recover_moment(cloud), InputError);
  EXPECT_THROW(net.set_calibration(calibrate(2)), InputError);
  net.set_calibration(calibrate(3));
  EXPECT_THROW(net.recover_moment(PointCloud(Eigen::MatrixXd::Ones(2, 4))), InputError);
}

TEST(RandomMLP, RecoversWhiteMoment) {
  const int d = 5;
  Rng rng(7);
  // Exactly white: orthonormal columns scaled so that M_raw = I.
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(2 * d, d);
  for (int i = 0; i < d; ++i) {
    pts(2 * i, i) = std::sqrt(static_cast<double>(d));
    pts(2 * i + 1, i) = -std::sqrt(static_cast<double>(d));
  }
  const PointCloud cloud(pts);
  ASSERT_LE((raw_moment(cloud) - Eigen::MatrixXd::Identity(d, d)).norm(), 1e-12);
  RandomMLP net(d, 200000, 8);
  net.set_calibration(calibrate(d));
  EXPECT_LE(rel(net.recover_moment(cloud), Eigen::MatrixXd::Identity(d, d)), 0.05);
}

TEST(RandomMLP, RecoversAxisMomentAndSquare) {
  Eigen::MatrixXd pts(1, 3);
  pts << 1, 0, 0;
  const PointCloud axis(pts);
  RandomMLP net3(3, 200000, 9);
  net3.set_calibration(calibrate(3));
  const Eigen::MatrixXd e1e1 = raw_moment(axis);
  EXPECT_LE(rel(net3.recover_moment(axis), e1e1), 0.05);

  Eigen::MatrixXd p2(4, 2);
  p2 << 2 * std::sqrt(2.0), 0, -2 * std::sqrt(2.0), 0, 0, std::sqrt(2.0), 0, -std::sqrt(2.0);
  const PointCloud scaled(p2);
  const Eigen::MatrixXd m = raw_moment(scaled);
  ASSERT_LE((m - Eigen::Matrix2d(Eigen::Vector2d(4, 1).asDiagonal())).norm(), 1e-12);
  RandomMLP net2(2, 500000, 10);
  net2.set_calibration(calibrate(2));
  EXPECT_LE(rel(net2.recover_moment_squared(scaled), m * m), 0.10);
}

TEST(RandomMLP, ZeroCloudGivesZero) {
  RandomMLP net(3, 1000, 11);
  net.set_calibration(calibrate(3));
  const PointCloud zero(Eigen::MatrixXd::Zero(4, 3));
  EXPECT_EQ(net.recover_moment(zero).norm(), 0.0);
  EXPECT_EQ(net.recover_moment_squared(zero).norm(), 0.0);
}

TEST(RandomMLP, SingleUnitUnbiasedOverReseeds) {
  // One unit per net: the estimate of M(0, 0) averages to the truth.
  Rng rng(12);
  const PointCloud cloud(rng.normal_matrix(30, 2));
  const Eigen::MatrixXd m = raw_moment(cloud);
  const MlpCalibration cal = calibrate(2);
  const int reseeds = 2000;
  double sum = 0.0, sq = 0.0;
  for (int s = 0; s < reseeds; ++s) {
    RandomMLP net(2, 1, 100 + s);
    net.set_calibration(cal);
    const double v = net.recover_moment(cloud)(0, 0);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / reseeds;
  const double se = std::sqrt((sq / reseeds - mean * mean) / reseeds);
  EXPECT_NEAR(mean, m(0, 0), 3 * se);
}

TEST(RandomMLP, WeightsDeterministicAndNested) {
  const RandomMLP a(4, 10, 3), b(4, 10, 3), wide(4, 20, 3);
  EXPECT_EQ(a.weights(), b.weights());
  EXPECT_EQ(wide.weights().topRows(10), a.weights());
}
