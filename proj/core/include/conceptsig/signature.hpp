#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/basis.hpp"

namespace conceptsig {

// N x d sample of a concept; labels are optional (empty or one per row).
struct PointCloud {
  Eigen::MatrixXd points;
  std::vector<std::string> labels;

  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd pts, std::vector<std::string> lbls = {})
      : points(std::move(pts)), labels(std::move(lbls)) {}

  Eigen::Index size() const { return points.rows(); }
  int dim() const { return static_cast<int>(points.cols()); }
  Eigen::VectorXd point(Eigen::Index i) const { return points.row(i).transpose(); }

  // Throws InputError unless N >= 1, labels match, and all entries are finite.
  void validate() const;
};

// Random projection applied to inputs before embedding; the matrix itself is
// regenerated from (seed, in_dim, out_dim).
struct ProjectionRecord {
  std::uint64_t seed = 0;
  int in_dim = 0;
  int out_dim = 0;

  bool operator==(const ProjectionRecord&) const = default;
};

// Rank decision for the null-space projector T: an eigenvalue of M counts as
// zero when it is <= max(abs_tol, rel_tol * largest eigenvalue).
struct RankPolicy {
  double rel_tol = 1e-12;
  double abs_tol = 1e-15;

  double threshold(double largest) const;
};

// (M, T, T_eps) for one concept, plus the spectrum and ranks.
struct Signature {
  MonomialBasis basis;
  Eigen::MatrixXd moment;
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd null_projector;   // T
  Eigen::MatrixXd eps_projector;    // T_eps
  double epsilon = 1e-6;
  int null_rank = 0;
  int eps_rank = 0;
  std::optional<ProjectionRecord> projection;

  // Dimension of the points the signature scores (before any projection).
  int input_dim() const { return projection ? projection->in_dim : basis.dim(); }
  Eigen::Index feature_dim() const { return static_cast<Eigen::Index>(basis.size()); }
};

struct NullSpace {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd null_projector;
  Eigen::MatrixXd eps_projector;
  int null_rank = 0;
  int eps_rank = 0;
};

struct ProjectionConfig {
  int out_dim = 0;
  std::uint64_t seed = 0;
};

struct FitConfig {
  int degree = 2;
  double epsilon = 1e-6;
  bool include_constant = true;
  std::optional<ProjectionConfig> projection;
  RankPolicy rank;
};

// M = (1/N) sum_i phi(x_i) phi(x_i)^T.
Eigen::MatrixXd moment_matrix(const PointCloud& cloud, const MonomialBasis& basis);

// S(x) = phi(x) phi(x)^T.
Eigen::MatrixXd point_signature(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const MonomialBasis& basis);

// Eigendecomposition of a symmetric PSD moment matrix into the exact and
// epsilon-approximate null-space projectors.
NullSpace null_signature(const Eigen::Ref<const Eigen::MatrixXd>& moment, double epsilon,
                         const RankPolicy& policy = {});

// Builds a full signature from a moment matrix already expressed in `basis`.
Signature signature_from_moment(MonomialBasis basis, Eigen::MatrixXd moment, double epsilon,
                                std::optional<ProjectionRecord> projection = std::nullopt,
                                const RankPolicy& policy = {});

// Optional random projection -> embed -> moment matrix -> null space.
Signature fit(const PointCloud& cloud, const FitConfig& config);

// phi(x)^T T phi(x) (T_eps when use_eps); x is in the signature's input space.
double membership_score(const Signature& sig, const Eigen::Ref<const Eigen::VectorXd>& x,
                        bool use_eps = false);

// Exact-T membership for bases too large for an m x m moment matrix. When
// N < m the range of M is spanned by the embedded samples, so the N x N Gram
// matrix gives the same nonzero spectrum, rank decision and scores as fit().
class SampleSpanMembership {
 public:
  SampleSpanMembership(const PointCloud& cloud, const FitConfig& config);

  // |T phi(x)|^2 with T = I - (projector onto range M); x in input space.
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::Index feature_dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index null_rank() const { return feature_dim() - range_.cols(); }

 private:
  MonomialBasis basis_;
  std::optional<ProjectionRecord> projection_;
  Eigen::MatrixXd range_;  // m x rank, orthonormal columns
};

// Maps an input-space point into the signature's basis space (applies the
// recorded projection, if any).
Eigen::VectorXd to_basis_space(const Signature& sig, const Eigen::Ref<const Eigen::VectorXd>& x);

// Unit vector spanning range(T) when null_rank == 1 (sign normalized so the
// largest-magnitude entry is positive). Throws InputError otherwise.
Eigen::VectorXd unit_null_vector(const Signature& sig);

}  // namespace conceptsig
