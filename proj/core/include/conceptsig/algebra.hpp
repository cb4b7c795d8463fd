#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "conceptsig/signature.hpp"

namespace conceptsig {

// F = I - T: projector onto the span of the concept's features.
Eigen::MatrixXd complement(const Signature& sig);

struct Similarity {
  double t_overlap = 0.0;  // T1 . T2 (Frobenius)
  double f_overlap = 0.0;  // F1 . F2
};

Similarity similarity(const Signature& a, const Signature& b);

// (c1 . c2)^2 for the unit null vectors of two single-equation signatures.
double coefficient_similarity(const Signature& a, const Signature& b);

struct IntersectOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

struct Intersection {
  Signature signature;
  int iterations = 0;
  double residual = 0.0;
  // Some eigenvalue of the limit fell inside (0.2, 0.8) before rounding.
  bool ill_separated = false;
};

// Projector calculus intersection: alternating projections
// P <- F1 P F1, P <- F2 P F2 from P = I converge to the projector onto
// range(F1) ∩ range(F2); the limit is rounded to a projector at 0.5. The
// returned signature has T = I - F_cap and the moment surrogate M = F_cap.
// Throws NumericError (with the residual) when max_iter is exhausted.
Intersection intersect(const Signature& a, const Signature& b, const IntersectOptions& opts = {});

// True iff |F_outer F_inner - F_inner|_F <= tol, i.e. the inner concept's
// feature span lies inside the outer one's.
bool subset_check(const Signature& outer, const Signature& inner, double tol = 1e-6);

struct DictionaryOptions {
  IntersectOptions intersect;
  double dedup_threshold = 1e-3;
  double subset_tol = 1e-6;
  std::size_t max_concepts = 512;
};

struct DictionaryResult {
  std::vector<Signature> atoms;
  // Input-order indices of pairs whose intersection did not converge.
  std::vector<std::pair<std::size_t, std::size_t>> skipped;
  std::vector<std::string> warnings;
  std::size_t closure_size = 0;
};

// Atomic concepts of a family of union concepts: closes the inputs under
// pairwise intersection, drops empty (rank-0 F) results and duplicates,
// discards intersections of two atoms (empty under the union model), and
// returns the minimal elements under subset_check.
DictionaryResult discover_dictionary(const std::vector<Signature>& sigs,
                                     const DictionaryOptions& opts = {});

// Throws InputError unless both signatures share basis and projection.
void require_same_space(const Signature& a, const Signature& b, const char* op);

}  // namespace conceptsig
