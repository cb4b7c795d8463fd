#include "conceptsig/projection.hpp"

#include <cmath>
#include <sstream>

#include "conceptsig/error.hpp"
#include "conceptsig/rng.hpp"

namespace conceptsig {

RandomProjection::RandomProjection(int in_dim, int out_dim, std::uint64_t seed)
    : in_dim_(in_dim), out_dim_(out_dim), seed_(seed) {
  if (in_dim < 1 || out_dim < 1) throw InputError("random projection: dimensions must be >= 1");
  if (seed == kIdentityProjectionSeed) {
    if (in_dim != out_dim)
      throw InputError("random projection: identity seed requires in_dim == out_dim");
    matrix_ = Eigen::MatrixXd::Identity(out_dim, in_dim);
    return;
  }
  Rng rng(seed);
  matrix_ = rng.normal_matrix(out_dim, in_dim) / std::sqrt(static_cast<double>(out_dim));
}

Eigen::VectorXd RandomProjection::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != in_dim_) {
    std::ostringstream msg;
    msg << "projection: point has dimension " << x.size() << ", expected " << in_dim_;
    throw InputError(msg.str());
  }
  return matrix_ * x;
}

PointCloud RandomProjection::project(const PointCloud& cloud) const {
  if (cloud.dim() != in_dim_) {
    std::ostringstream msg;
    msg << "projection: cloud has dimension " << cloud.dim() << ", expected " << in_dim_;
    throw InputError(msg.str());
  }
  return PointCloud(cloud.points * matrix_.transpose(), cloud.labels);
}

int target_dim(int k, double delta, double eps, double c_jl) {
  if (k < 1) throw InputError("target_dim: k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("target_dim: delta must be in (0, 1)");
  if (!(eps > 0.0 && eps <= 1.0)) throw InputError("target_dim: eps must be in (0, 1]");
  const double m = c_jl * (k + std::log(1.0 / delta)) / (eps * eps);
  return static_cast<int>(std::ceil(m - 1e-9));
}

}  // namespace conceptsig
