#include "conceptsig/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conceptsig/algebra.hpp"
#include "conceptsig/error.hpp"

namespace conceptsig {

Eigen::VectorXd flatten_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() != m.cols()) throw InputError("flatten: matrix must be square");
  const Eigen::Index n = m.rows();
  Eigen::VectorXd out(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) out(k++) = m(i, j);
  return out;
}

Eigen::MatrixXd reconstruct_matrix(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  const auto len = flat.size();
  const auto n = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (n * (n + 1) / 2 != len) {
    std::ostringstream msg;
    msg << "reconstruct: length " << len << " is not a triangular number";
    throw InputError(msg.str());
  }
  Eigen::MatrixXd m(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) m(i, j) = m(j, i) = flat(k++);
  return m;
}

Eigen::VectorXd flatten(const Signature& sig, FlatSource source) {
  return source == FlatSource::kNull ? flatten_matrix(sig.null_projector)
                                     : flatten_matrix(complement(sig));
}

namespace {

FitConfig level2_fit_config(const Level2Config& config, Eigen::Index flat_dim) {
  FitConfig fit_cfg;
  fit_cfg.degree = config.degree;
  fit_cfg.epsilon = config.epsilon;
  fit_cfg.include_constant = config.include_constant;
  if (config.projection_dim > 0 && flat_dim > config.projection_dim)
    fit_cfg.projection = ProjectionConfig{config.projection_dim, config.seed};
  return fit_cfg;
}

}  // namespace

Signature signature_of_signatures(const std::vector<Signature>& sigs, const Level2Config& config) {
  if (sigs.empty()) throw InputError("signature_of_signatures: no signatures");
  for (std::size_t i = 1; i < sigs.size(); ++i)
    require_same_space(sigs[0], sigs[i], "signature_of_signatures");
  std::vector<Eigen::VectorXd> rows;
  for (const auto& s : sigs) rows.push_back(flatten(s, config.source));
  // Canonical row order so the moment sum, and hence T, is independent of input order.
  std::sort(rows.begin(), rows.end(), [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  });
  const Eigen::VectorXd& first = rows.front();
  Eigen::MatrixXd flats(static_cast<Eigen::Index>(rows.size()), first.size());
  for (std::size_t i = 0; i < rows.size(); ++i) flats.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return fit(PointCloud(std::move(flats)), level2_fit_config(config, first.size()));
}

double level2_score(const Signature& level2, const Signature& candidate,
                    const Level2Config& config) {
  return membership_score(level2, flatten(candidate, config.source), config.use_eps);
}

PlanarMoments planar_moments(const PointCloud& cloud) {
  cloud.validate();
  if (cloud.dim() < 2) throw InputError("planar_moments: need at least 2 coordinates");
  const auto x = cloud.points.col(0).array();
  const auto y = cloud.points.col(1).array();
  PlanarMoments m;
  m << x.mean(), y.mean(), x.square().mean(), y.square().mean(), (x * y).mean();
  return m;
}

PlanarMoments rotation_a1(const PlanarMoments& m) {
  PlanarMoments a;
  a << m(1), -m(0), 2.0 * m(4), -2.0 * m(4), m(3) - m(2);
  return a;
}

PlanarMoments rotation_a2(const PlanarMoments& m) {
  PlanarMoments a;
  a << -m(0), -m(1), 2.0 * (m(3) - m(2)), 2.0 * (m(2) - m(3)), -4.0 * m(4);
  return a;
}

PlanarMoments moment_rotation_map(const PlanarMoments& m, double theta, MapMode mode) {
  if (mode == MapMode::kApproximate)
    return m + theta * rotation_a1(m) + 0.5 * theta * theta * rotation_a2(m);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  PlanarMoments out;
  out(0) = c * m(0) + s * m(1);
  out(1) = -s * m(0) + c * m(1);
  out(2) = c * c * m(2) + 2.0 * c * s * m(4) + s * s * m(3);
  out(3) = s * s * m(2) - 2.0 * c * s * m(4) + c * c * m(3);
  out(4) = -c * s * m(2) + (c * c - s * s) * m(4) + c * s * m(3);
  return out;
}

PlanarMoments moment_translation_map(const PlanarMoments& m, double u, double v, MapMode mode) {
  PlanarMoments out;
  out(0) = m(0) + u;
  out(1) = m(1) + v;
  out(2) = m(2) + 2.0 * u * m(0);
  out(3) = m(3) + 2.0 * v * m(1);
  out(4) = m(4) + u * m(1) + v * m(0);
  if (mode == MapMode::kExact) {
    out(2) += u * u;
    out(3) += v * v;
    out(4) += u * v;
  }
  return out;
}

RotationConcept rotation_invariant_signature(const PointCloud& base,
                                             const std::vector<double>& thetas,
                                             const FitConfig& level1, const Level2Config& level2) {
  if (thetas.size() < 8) throw InputError("rotation_invariant_signature: need >= 8 grid angles");
  std::vector<Signature> sigs;
  sigs.reserve(thetas.size());
  for (double theta : thetas) {
    PointCloud rotated = base;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    rotated.points.col(0) = c * base.points.col(0) + s * base.points.col(1);
    rotated.points.col(1) = -s * base.points.col(0) + c * base.points.col(1);
    sigs.push_back(fit(rotated, level1));
  }
  return RotationConcept{signature_of_signatures(sigs, level2), level1, level2};
}

double rotation_score(const RotationConcept& rc, const PointCloud& cloud) {
  return level2_score(rc.level2, fit(cloud, rc.level1), rc.config);
}

Signature velocity_signature(const std::vector<Signature>& trajectories) {
  if (trajectories.size() < 2)
    throw InputError("velocity_signature: need at least 2 trajectory signatures");
  Signature acc = intersect(trajectories[0], trajectories[1]).signature;
  for (std::size_t i = 2; i < trajectories.size(); ++i)
    acc = intersect(acc, trajectories[i]).signature;
  return acc;
}

}  // namespace conceptsig
