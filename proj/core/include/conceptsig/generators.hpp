#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

struct ManifoldSpec;

// offset + basis * z with z uniform in the box [lo, hi]^k (basis is d x k).
struct SubspaceSpec {
  Eigen::MatrixXd basis;
  Eigen::VectorXd offset;
  double lo = -1.0;
  double hi = 1.0;
};

// Planar circle; angles drawn from [theta_lo, theta_hi).
struct CircleSpec {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 1.0;
  double theta_lo = 0.0;
  double theta_hi = 2.0 * std::numbers::pi;
};

// Sphere S^{d-1} in R^d, d = center.size(). cap_angle < pi restricts samples
// to the cap within that polar angle of +e_1.
struct SphereSpec {
  Eigen::VectorXd center;
  double radius = 1.0;
  double cap_angle = std::numbers::pi;
};

// x = coefficients * phi_r(z) where phi_r is the degree-r monomial basis in k
// variables (constant included) and z is uniform in [lo, hi]^k.
struct PolyGeneratorSpec {
  int k = 1;
  int r = 1;
  Eigen::MatrixXd coefficients;  // d x binomial(k + r, r)
  double lo = -1.0;
  double hi = 1.0;
};

struct SegmentSpec {
  Eigen::VectorXd a;
  Eigen::VectorXd b;
};

// p(t) = start + sum_j velocity[j] t^{j+1} / (j+1), i.e. the integral of the
// velocity polynomial v(t) = sum_j velocity[j] t^j, for t in [t0, t1].
struct TrajectorySpec {
  Eigen::VectorXd start;
  std::vector<Eigen::VectorXd> velocity;
  double t0 = 0.0;
  double t1 = 1.0;
  bool append_one = true;
};

struct UnionSpec {
  std::vector<ManifoldSpec> parts;
};

enum class TransformFamily { kRotation, kTranslation };

// A base concept moved by one transform whose parameter is drawn uniformly
// from [lo, hi] (theta for rotations, (u, v) for translations).
struct TransformSpec {
  std::shared_ptr<const ManifoldSpec> base;
  TransformFamily family = TransformFamily::kRotation;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

enum class Sampling { kUniform, kGrid };

struct ManifoldSpec {
  std::variant<SubspaceSpec, CircleSpec, SphereSpec, PolyGeneratorSpec, SegmentSpec,
               TrajectorySpec, UnionSpec, TransformSpec>
      shape;
  double noise_sigma = 0.0;
  Sampling sampling = Sampling::kUniform;
  std::string name;

  // Ambient dimension of sampled points.
  int dim() const;
  // Throws InputError for invalid parameters.
  void validate() const;
};

// n points from the spec; deterministic per seed. Grid sampling places
// parameters at lo + i (hi - lo) / n (segments and trajectories include both
// endpoints). Union parts are sampled in order with labels taken from part
// names; other shapes are labelled with the spec name, if any.
PointCloud sample(const ManifoldSpec& spec, int n, std::uint64_t seed);

ManifoldSpec rectangle(const Eigen::Vector2d& center, double width, double height);

// Six labelled parts: head circle, torso, two arms, two legs.
ManifoldSpec stick_figure();

// One cloud per start point at t_samples evenly spaced times in [t0, t1],
// each with the constant 1 appended.
std::vector<PointCloud> trajectory_cloud(const std::vector<Eigen::VectorXd>& starts,
                                         const std::vector<Eigen::VectorXd>& velocity,
                                         int t_samples, double t0 = 0.0, double t1 = 1.0);

// x' = x cos(theta) + y sin(theta), y' = -x sin(theta) + y cos(theta) on the
// first two columns; further columns pass through.
PointCloud rotate_cloud(const PointCloud& base, double theta);
PointCloud translate_cloud(const PointCloud& base, double u, double v);

// One transformed cloud per parameter vector ((theta) or (u, v)).
std::vector<PointCloud> transform_family(const PointCloud& base, TransformFamily family,
                                         const std::vector<Eigen::VectorXd>& params);

}  // namespace conceptsig
