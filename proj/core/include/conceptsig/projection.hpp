#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

// Seed value that, with in_dim == out_dim, yields the identity map. Used by
// tests to exercise the projection path without distortion.
inline constexpr std::uint64_t kIdentityProjectionSeed = ~std::uint64_t{0};

// Gaussian random linear map A: R^in -> R^out, entries N(0, 1/out), so that
// E|Ax|^2 = |x|^2. Fully determined by (in_dim, out_dim, seed).
class RandomProjection {
 public:
  RandomProjection(int in_dim, int out_dim, std::uint64_t seed);
  explicit RandomProjection(const ProjectionRecord& record)
      : RandomProjection(record.in_dim, record.out_dim, record.seed) {}

  static RandomProjection identity(int dim) {
    return RandomProjection(dim, dim, kIdentityProjectionSeed);
  }

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  ProjectionRecord record() const { return {seed_, in_dim_, out_dim_}; }

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  PointCloud project(const PointCloud& cloud) const;

 private:
  int in_dim_;
  int out_dim_;
  std::uint64_t seed_;
  Eigen::MatrixXd matrix_;
};

// ceil(c_jl * (k + ln(1/delta)) / eps^2): output dimension that preserves
// distances on a k-dimensional manifold plus one point within (1 +- eps)
// with probability 1 - delta.
int target_dim(int k, double delta, double eps, double c_jl = 8.0);

}  // namespace conceptsig
