#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

namespace wick {

// E[r_{i1} ... r_{in}] for r ~ N(0, I): the product over distinct indices of
// (c - 1)!! where c is the index's multiplicity, or 0 if any c is odd.
double gaussian_moment(const std::vector<int>& indices);

// Exact Gaussian expectations for symmetric M, computed index by index:
// E[r r^T (r^T M r)], E[r r^T (r^T M r)^2], E[r^T M r], E[(r^T M r)^2].
Eigen::MatrixXd rrt_g1(const Eigen::Ref<const Eigen::MatrixXd>& m);
Eigen::MatrixXd rrt_g2(const Eigen::Ref<const Eigen::MatrixXd>& m);
double g1(const Eigen::Ref<const Eigen::MatrixXd>& m);
double g2(const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace wick

// Coefficients of the two recovery formulas
//   M   = a1 E[r r^T G1] + a2 E[G1] I
//   M^2 = b1 E[r r^T G2] + b2 E[G1] E[r r^T G1] + b3 E[G1]^2 I + b4 E[G2] I
// with G1 = r^T M r and G2 = G1^2.
struct MlpCalibration {
  int d = 0;
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double b4 = 0.0;
  // Max relative Frobenius error on held-out symmetric PSD matrices.
  double stage1_residual = 0.0;
  double stage2_residual = 0.0;
};

// Least-squares fit of the coefficients against the Wick oracle on random
// diagonal matrices, checked on random dense PSD matrices. Throws
// NumericError when a held-out residual exceeds max_residual.
MlpCalibration calibrate(int d, std::uint64_t seed = 0, int fit_matrices = 6,
                         int check_matrices = 4, double max_residual = 1e-6);

// (1/N) sum_i x_i x_i^T.
Eigen::MatrixXd raw_moment(const PointCloud& cloud);

// Two-layer network with standard Gaussian first-layer weights and square
// activation.
class RandomMLP {
 public:
  RandomMLP(int d, int units, std::uint64_t seed);

  int dim() const { return d_; }
  int units() const { return static_cast<int>(weights_.rows()); }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& weights() const { return weights_; }  // units x d

  void set_calibration(const MlpCalibration& c);
  const std::optional<MlpCalibration>& calibration() const { return calibration_; }

  // G1_hat_j = (1/N) sum_i (x_i . r_j)^2 = r_j^T M_raw r_j.
  Eigen::VectorXd g1_hat(const PointCloud& cloud) const;

  Eigen::MatrixXd recover_moment(const PointCloud& cloud) const;
  Eigen::MatrixXd recover_moment_squared(const PointCloud& cloud) const;

  // The textbook constants: M = E[r r^T G1] - (d + 1) I and
  // M^2 = E[r r^T G1 + beta1 r r^T G2] + beta2 I, beta1 = -(2d + 2), beta2 = d^2 + 1.
  Eigen::MatrixXd recover_moment_reference(const PointCloud& cloud) const;
  Eigen::MatrixXd recover_moment_squared_reference(const PointCloud& cloud) const;

 private:
  struct UnitAverages {
    Eigen::MatrixXd rrt_g1;
    Eigen::MatrixXd rrt_g2;
    double g1 = 0.0;
    double g2 = 0.0;
  };
  UnitAverages averages(const PointCloud& cloud) const;
  const MlpCalibration& require_calibration() const;

  int d_;
  std::uint64_t seed_;
  Eigen::MatrixXd weights_;
  std::optional<MlpCalibration> calibration_;
};

}  // namespace conceptsig
