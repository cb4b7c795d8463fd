#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Core>

namespace conceptsig {

// Portable pseudo-random source. std::mt19937_64 output is fixed by the
// standard; the distributions below are implemented here so that draws are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller.
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);
  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols);
  // Uniform on the unit sphere S^{n-1}.
  Eigen::VectorXd unit_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Derives an independent sub-seed for a numbered stream (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace conceptsig
