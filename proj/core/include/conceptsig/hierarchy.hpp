#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

enum class FlatSource { kNull, kComplement };

// Upper triangle (diagonal included) of a symmetric matrix, row-major.
Eigen::VectorXd flatten_matrix(const Eigen::Ref<const Eigen::MatrixXd>& m);
// Inverse of flatten_matrix; throws InputError unless the length is n(n+1)/2.
Eigen::MatrixXd reconstruct_matrix(const Eigen::Ref<const Eigen::VectorXd>& flat);

// Flattened T (or F = I - T) of a signature.
Eigen::VectorXd flatten(const Signature& sig, FlatSource source = FlatSource::kNull);

struct Level2Config {
  int degree = 2;
  double epsilon = 1e-4;
  // Flats longer than this are randomly projected to this many coordinates.
  int projection_dim = 40;
  std::uint64_t seed = 0;
  bool include_constant = true;
  FlatSource source = FlatSource::kNull;
  // Score candidates against T_eps rather than T.
  bool use_eps = false;
};

// Fits a signature over the flats of `sigs` (which must share a basis).
Signature signature_of_signatures(const std::vector<Signature>& sigs, const Level2Config& config);

// Membership of a level-1 signature in a level-2 concept.
double level2_score(const Signature& level2, const Signature& candidate,
                    const Level2Config& config);

// Planar moments (M_x, M_y, M_{x^2}, M_{y^2}, M_{xy}) of the first two columns.
using PlanarMoments = Eigen::Matrix<double, 5, 1>;
PlanarMoments planar_moments(const PointCloud& cloud);

enum class MapMode { kExact, kApproximate };

// Moments of the cloud rotated by theta (x' = x cos + y sin, y' = -x sin + y cos).
// kApproximate returns the second-order Taylor form a0 + theta a1 + theta^2/2 a2.
PlanarMoments moment_rotation_map(const PlanarMoments& m, double theta,
                                  MapMode mode = MapMode::kExact);
// First and second theta-derivatives of the rotation map at 0.
PlanarMoments rotation_a1(const PlanarMoments& m);
PlanarMoments rotation_a2(const PlanarMoments& m);

// Moments of the cloud shifted by (u, v); kApproximate drops the u^2, v^2, uv terms.
PlanarMoments moment_translation_map(const PlanarMoments& m, double u, double v,
                                     MapMode mode = MapMode::kExact);

struct RotationConcept {
  Signature level2;
  FitConfig level1;
  Level2Config config;
};

// Fits level-1 signatures of the base rotated by each grid angle and the
// level-2 signature over them.
RotationConcept rotation_invariant_signature(const PointCloud& base,
                                             const std::vector<double>& thetas,
                                             const FitConfig& level1, const Level2Config& level2);

// Level-2 score of a new cloud against a rotation concept.
double rotation_score(const RotationConcept& rc, const PointCloud& cloud);

// Velocity concept of a group of trajectory signatures: their intersection.
Signature velocity_signature(const std::vector<Signature>& trajectories);

}  // namespace conceptsig
