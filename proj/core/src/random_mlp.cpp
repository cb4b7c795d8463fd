#include "conceptsig/random_mlp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <type_traits>

#include <Eigen/QR>

#include "conceptsig/error.hpp"
#include "conceptsig/rng.hpp"

namespace conceptsig {

namespace wick {

double gaussian_moment(const std::vector<int>& indices) {
  std::map<int, int> counts;
  for (int i : indices) ++counts[i];
  double out = 1.0;
  for (const auto& [index, c] : counts) {
    if (c % 2 != 0) return 0.0;
    for (int k = c - 1; k > 1; k -= 2) out *= k;
  }
  return out;
}

Eigen::MatrixXd rrt_g1(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          if (m(c, e) != 0.0) out(a, b) += m(c, e) * gaussian_moment({a, b, c, e});
  return out;
}

Eigen::MatrixXd rrt_g2(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          if (m(c, e) == 0.0) continue;
          for (int f = 0; f < d; ++f)
            for (int g = 0; g < d; ++g)
              if (m(f, g) != 0.0)
                out(a, b) += m(c, e) * m(f, g) * gaussian_moment({a, b, c, e, f, g});
        }
  return out;
}

double g1(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const int d = static_cast<int>(m.rows());
  double out = 0.0;
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e) out += m(c, e) * gaussian_moment({c, e});
  return out;
}

double g2(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const int d = static_cast<int>(m.rows());
  double out = 0.0;
  for (int c = 0; c < d; ++c)
    for (int e = 0; e < d; ++e)
      for (int f = 0; f < d; ++f)
        for (int g = 0; g < d; ++g) out += m(c, e) * m(f, g) * gaussian_moment({c, e, f, g});
  return out;
}

}  // namespace wick

namespace {

Eigen::MatrixXd random_psd(Rng& rng, int d, bool diagonal) {
  if (diagonal) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = rng.uniform(0.1, 2.0);
    return v.asDiagonal();
  }
  const Eigen::MatrixXd a = rng.normal_matrix(d, d);
  return a * a.transpose() / d;
}

// Columns: one feature matrix per coefficient, flattened; target flattened.
struct Stage {
  std::vector<Eigen::MatrixXd> features;
  Eigen::MatrixXd target;
};

Stage stage1(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  return {{wick::rrt_g1(m), wick::g1(m) * Eigen::MatrixXd::Identity(d, d)}, m};
}

Stage stage2(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const double t = wick::g1(m);
  return {{wick::rrt_g2(m), t * wick::rrt_g1(m), t * t * eye, wick::g2(m) * eye}, m * m};
}

Eigen::VectorXd solve(const std::vector<Stage>& stages) {
  const auto nc = static_cast<Eigen::Index>(stages.front().features.size());
  const auto per = stages.front().target.size();
  Eigen::MatrixXd a(per * static_cast<Eigen::Index>(stages.size()), nc);
  Eigen::VectorXd y(a.rows());
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto off = static_cast<Eigen::Index>(s) * per;
    for (Eigen::Index c = 0; c < nc; ++c)
      a.col(c).segment(off, per) = stages[s].features[c].reshaped();
    y.segment(off, per) = stages[s].target.reshaped();
  }
  return a.completeOrthogonalDecomposition().solve(y);
}

double residual(const Stage& s, const Eigen::VectorXd& coef) {
  Eigen::MatrixXd pred = Eigen::MatrixXd::Zero(s.target.rows(), s.target.cols());
  for (std::size_t c = 0; c < s.features.size(); ++c) pred += coef(c) * s.features[c];
  return (pred - s.target).norm() / std::max(s.target.norm(), 1e-300);
}

// Pairwise (tree) reduction of per-unit contributions for a fixed summation order.
template <class Fn>
std::invoke_result_t<Fn, int> tree_sum(int lo, int hi, const Fn& term) {
  if (hi - lo <= 32) {
    std::invoke_result_t<Fn, int> acc = term(lo);
    for (int j = lo + 1; j < hi; ++j) acc += term(j);
    return acc;
  }
  const int mid = lo + (hi - lo) / 2;
  return tree_sum(lo, mid, term) + tree_sum(mid, hi, term);
}

}  // namespace

MlpCalibration calibrate(int d, std::uint64_t seed, int fit_matrices, int check_matrices,
                         double max_residual) {
  if (d < 1) throw InputError("calibrate: d must be >= 1");
  if (fit_matrices < 1 || check_matrices < 1)
    throw InputError("calibrate: need at least one fit and one check matrix");
  Rng rng(derive_seed(seed, 0x6d6c70));
  std::vector<Stage> s1, s2;
  for (int i = 0; i < fit_matrices; ++i) {
    const Eigen::MatrixXd m = random_psd(rng, d, true);
    s1.push_back(stage1(m));
    s2.push_back(stage2(m));
  }
  const Eigen::VectorXd c1 = solve(s1);
  const Eigen::VectorXd c2 = solve(s2);

  MlpCalibration out;
  out.d = d;
  out.a1 = c1(0);
  out.a2 = c1(1);
  out.b1 = c2(0);
  out.b2 = c2(1);
  out.b3 = c2(2);
  out.b4 = c2(3);
  if (!c1.allFinite() || !c2.allFinite()) throw NumericError("calibrate: non-finite coefficients");
  for (int i = 0; i < check_matrices; ++i) {
    const Eigen::MatrixXd m = random_psd(rng, d, false);
    out.stage1_residual = std::max(out.stage1_residual, residual(stage1(m), c1));
    out.stage2_residual = std::max(out.stage2_residual, residual(stage2(m), c2));
  }
  if (out.stage1_residual > max_residual || out.stage2_residual > max_residual) {
    std::ostringstream msg;
    msg << "calibrate: held-out residual too large (stage 1 " << out.stage1_residual
        << ", stage 2 " << out.stage2_residual << ", limit " << max_residual << ")";
    throw NumericError(msg.str());
  }
  return out;
}

Eigen::MatrixXd raw_moment(const PointCloud& cloud) {
  cloud.validate();
  return cloud.points.transpose() * cloud.points / static_cast<double>(cloud.size());
}

RandomMLP::RandomMLP(int d, int units, std::uint64_t seed) : d_(d), seed_(seed) {
  if (d < 1) throw InputError("random mlp: d must be >= 1");
  if (units < 1) throw InputError("random mlp: units must be >= 1");
  Rng rng(seed);
  weights_ = rng.normal_matrix(units, d);
}

void RandomMLP::set_calibration(const MlpCalibration& c) {
  if (c.d != d_) throw InputError("random mlp: calibration dimension mismatch");
  calibration_ = c;
}

const MlpCalibration& RandomMLP::require_calibration() const {
  if (!calibration_) throw InputError("random mlp: network is not calibrated");
  return *calibration_;
}

Eigen::VectorXd RandomMLP::g1_hat(const PointCloud& cloud) const {
  const Eigen::MatrixXd m = raw_moment(cloud);
  if (m.rows() != d_) {
    std::ostringstream msg;
    msg << "random mlp: cloud has dimension " << m.rows() << ", network expects " << d_;
    throw InputError(msg.str());
  }
  return (weights_ * m).cwiseProduct(weights_).rowwise().sum();
}

RandomMLP::UnitAverages RandomMLP::averages(const PointCloud& cloud) const {
  const Eigen::VectorXd g = g1_hat(cloud);
  const int n = units();
  UnitAverages out;
  out.rrt_g1 = tree_sum(0, n, [&](int j) -> Eigen::MatrixXd {
                 return weights_.row(j).transpose() * weights_.row(j) * g(j);
               }) /
               n;
  out.rrt_g2 = tree_sum(0, n, [&](int j) -> Eigen::MatrixXd {
                 return weights_.row(j).transpose() * weights_.row(j) * (g(j) * g(j));
               }) /
               n;
  const Eigen::VectorXd g2 = g.array().square();
  out.g1 = tree_sum(0, n, [&](int j) { return g(j); }) / n;
  out.g2 = tree_sum(0, n, [&](int j) { return g2(j); }) / n;
  return out;
}

Eigen::MatrixXd RandomMLP::recover_moment(const PointCloud& cloud) const {
  const MlpCalibration& c = require_calibration();
  const UnitAverages avg = averages(cloud);
  return c.a1 * avg.rrt_g1 + c.a2 * avg.g1 * Eigen::MatrixXd::Identity(d_, d_);
}

Eigen::MatrixXd RandomMLP::recover_moment_squared(const PointCloud& cloud) const {
  const MlpCalibration& c = require_calibration();
  const UnitAverages avg = averages(cloud);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d_, d_);
  return c.b1 * avg.rrt_g2 + c.b2 * avg.g1 * avg.rrt_g1 + c.b3 * avg.g1 * avg.g1 * eye +
         c.b4 * avg.g2 * eye;
}

Eigen::MatrixXd RandomMLP::recover_moment_reference(const PointCloud& cloud) const {
  const UnitAverages avg = averages(cloud);
  return avg.rrt_g1 - (d_ + 1.0) * Eigen::MatrixXd::Identity(d_, d_);
}

Eigen::MatrixXd RandomMLP::recover_moment_squared_reference(const PointCloud& cloud) const {
  const UnitAverages avg = averages(cloud);
  const double beta1 = -(2.0 * d_ + 2.0);
  const double beta2 = static_cast<double>(d_) * d_ + 1.0;
  return avg.rrt_g1 + beta1 * avg.rrt_g2 + beta2 * Eigen::MatrixXd::Identity(d_, d_);
}

}  // namespace conceptsig
