#include "conceptsig/signature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "conceptsig/error.hpp"
#include "conceptsig/projection.hpp"

namespace conceptsig {

void PointCloud::validate() const {
  if (points.rows() < 1) throw InputError("point cloud is empty");
  if (points.cols() < 1) throw InputError("point cloud has zero dimension");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != points.rows())
    throw InputError("point cloud: label count does not match point count");
  if (!points.allFinite()) throw InputError("point cloud contains non-finite entries");
}

double RankPolicy::threshold(double largest) const {
  return std::max(abs_tol, rel_tol * std::max(largest, 0.0));
}

Eigen::MatrixXd moment_matrix(const PointCloud& cloud, const MonomialBasis& basis) {
  cloud.validate();
  if (cloud.dim() != basis.dim()) {
    std::ostringstream msg;
    msg << "moment_matrix: cloud dimension " << cloud.dim() << " does not match basis dimension "
        << basis.dim();
    throw InputError(msg.str());
  }
  const Eigen::MatrixXd features = basis.embed_rows(cloud.points);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(features.cols(), features.cols());
  m.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose(), 1.0 / features.rows());
  return m.selfadjointView<Eigen::Lower>();
}

Eigen::MatrixXd point_signature(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const MonomialBasis& basis) {
  const Eigen::VectorXd phi = basis.embed(x);
  return phi * phi.transpose();
}

NullSpace null_signature(const Eigen::Ref<const Eigen::MatrixXd>& moment, double epsilon,
                         const RankPolicy& policy) {
  if (moment.rows() != moment.cols() || moment.rows() == 0)
    throw InputError("null_signature: moment matrix must be square and non-empty");
  if (!moment.allFinite()) throw NumericError("null_signature: moment matrix has non-finite entries");

  const Eigen::MatrixXd sym = 0.5 * (moment + moment.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "null_signature: eigendecomposition failed (m = " << sym.rows()
        << ", max |entry| = " << sym.cwiseAbs().maxCoeff() << ")";
    throw NumericError(msg.str());
  }

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& ascending = solver.eigenvalues();
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  const Eigen::Index m = ascending.size();
  const double largest = ascending(m - 1);
  const double zero_tol = policy.threshold(largest);
  const double eps_tol = std::max(epsilon, zero_tol);

  int null_rank = 0;
  int eps_rank = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (ascending(i) <= zero_tol) ++null_rank;
    if (ascending(i) <= eps_tol) ++eps_rank;
  }

  NullSpace out;
  out.singular_values = ascending.reverse().cwiseMax(0.0);
  out.null_rank = null_rank;
  out.eps_rank = eps_rank;
  const auto null_basis = vectors.leftCols(null_rank);
  const auto eps_basis = vectors.leftCols(eps_rank);
  out.null_projector = null_basis * null_basis.transpose();
  out.eps_projector = eps_basis * eps_basis.transpose();
  return out;
}

Signature signature_from_moment(MonomialBasis basis, Eigen::MatrixXd moment, double epsilon,
                                std::optional<ProjectionRecord> projection,
                                const RankPolicy& policy) {
  if (moment.rows() != static_cast<Eigen::Index>(basis.size()))
    throw InputError("signature: moment matrix size does not match basis size");
  NullSpace ns = null_signature(moment, epsilon, policy);
  return Signature{std::move(basis),
                   std::move(moment),
                   std::move(ns.singular_values),
                   std::move(ns.null_projector),
                   std::move(ns.eps_projector),
                   epsilon,
                   ns.null_rank,
                   ns.eps_rank,
                   projection};
}

Signature fit(const PointCloud& cloud, const FitConfig& config) {
  cloud.validate();
  if (config.degree < 1) throw InputError("fit: degree must be >= 1");
  if (!(config.epsilon >= 0.0)) throw InputError("fit: epsilon must be >= 0");

  std::optional<ProjectionRecord> record;
  const PointCloud* working = &cloud;
  PointCloud projected;
  if (config.projection) {
    RandomProjection proj(cloud.dim(), config.projection->out_dim, config.projection->seed);
    projected = proj.project(cloud);
    working = &projected;
    record = proj.record();
  }

  MonomialBasis basis(working->dim(), config.degree, config.include_constant);
  Eigen::MatrixXd moment = moment_matrix(*working, basis);
  return signature_from_moment(std::move(basis), std::move(moment), config.epsilon, record,
                               config.rank);
}

Eigen::VectorXd to_basis_space(const Signature& sig, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != sig.input_dim()) {
    std::ostringstream msg;
    msg << "membership: point has dimension " << x.size() << ", signature expects "
        << sig.input_dim();
    throw InputError(msg.str());
  }
  if (!sig.projection) return x;
  return RandomProjection(*sig.projection).apply(x);
}

double membership_score(const Signature& sig, const Eigen::Ref<const Eigen::VectorXd>& x,
                        bool use_eps) {
  const Eigen::VectorXd phi = sig.basis.embed(to_basis_space(sig, x));
  const Eigen::MatrixXd& t = use_eps ? sig.eps_projector : sig.null_projector;
  // |T phi|^2 equals phi^T T phi for an orthogonal projector and is never negative.
  return (t * phi).squaredNorm();
}

SampleSpanMembership::SampleSpanMembership(const PointCloud& cloud, const FitConfig& config)
    : basis_(1, 1) {
  cloud.validate();
  if (config.degree < 1) throw InputError("fit: degree must be >= 1");
  Eigen::MatrixXd pts = cloud.points;
  if (config.projection) {
    RandomProjection proj(cloud.dim(), config.projection->out_dim, config.projection->seed);
    pts = proj.project(cloud).points;
    projection_ = proj.record();
  }
  basis_ = MonomialBasis(static_cast<int>(pts.cols()), config.degree, config.include_constant);
  const Eigen::MatrixXd features = basis_.embed_rows(pts);  // N x m
  const double n = static_cast<double>(features.rows());
  const Eigen::MatrixXd gram = features * features.transpose() / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericError("sample span: eigendecomposition failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();
  const double zero_tol = config.rank.threshold(lambda(lambda.size() - 1));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (lambda(i) > zero_tol) keep.push_back(i);
  range_.resize(features.cols(), static_cast<Eigen::Index>(keep.size()));
  // Right singular vectors: v = Phi^T u / sqrt(N lambda).
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Eigen::Index i = keep[c];
    range_.col(static_cast<Eigen::Index>(c)) =
        features.transpose() * solver.eigenvectors().col(i) / std::sqrt(n * lambda(i));
  }
}

double SampleSpanMembership::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int in_dim = projection_ ? projection_->in_dim : basis_.dim();
  if (x.size() != in_dim) {
    std::ostringstream msg;
    msg << "membership: point has dimension " << x.size() << ", signature expects " << in_dim;
    throw InputError(msg.str());
  }
  const Eigen::VectorXd y = projection_ ? RandomProjection(*projection_).apply(x) : Eigen::VectorXd(x);
  const Eigen::VectorXd phi = basis_.embed(y);
  return (phi - range_ * (range_.transpose() * phi)).squaredNorm();
}

Eigen::VectorXd unit_null_vector(const Signature& sig) {
  if (sig.null_rank != 1) {
    std::ostringstream msg;
    msg << "not a single-equation manifold (null rank " << sig.null_rank << ")";
    throw InputError(msg.str());
  }
  Eigen::Index col = 0;
  sig.null_projector.diagonal().maxCoeff(&col);
  Eigen::VectorXd c = sig.null_projector.col(col);
  c.normalize();
  Eigen::Index big = 0;
  c.cwiseAbs().maxCoeff(&big);
  if (c(big) < 0) c = -c;
  return c;
}

}  // namespace conceptsig
