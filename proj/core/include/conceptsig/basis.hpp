#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace conceptsig {

// Exponent vector of one monomial x_1^{e_1} ... x_d^{e_d}.
struct MultiIndex {
  std::vector<int> exponents;
  int degree = 0;

  bool operator==(const MultiIndex&) const = default;
};

// Ordered set of monomials spanning the polynomial feature map phi: R^d -> R^m.
//
// Monomials are kept in graded lexicographic order: by total degree, and
// within one degree by decreasing exponent of x_1, then x_2, and so on, so the
// degree-2 basis in two variables is [1, x1, x2, x1^2, x1*x2, x2^2]. The
// constant monomial is present unless the basis was built homogeneous
// (include_constant == false), in which case degrees 1..max_degree remain.
class MonomialBasis {
 public:
  static constexpr std::size_t kDefaultSizeCap = 20000;

  MonomialBasis(int dim, int max_degree, bool include_constant = true,
                std::size_t size_cap = kDefaultSizeCap);

  int dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  bool include_constant() const { return include_constant_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  // phi(x); x must have length dim().
  Eigen::VectorXd embed(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Row i of the result is phi(points.row(i)).
  Eigen::MatrixXd embed_rows(const Eigen::Ref<const Eigen::MatrixXd>& points) const;

  // Human-readable monomial, e.g. "1", "x1", "x1^2*x2".
  std::string monomial_name(std::size_t i) const;

  bool operator==(const MonomialBasis& other) const {
    return dim_ == other.dim_ && max_degree_ == other.max_degree_ &&
           include_constant_ == other.include_constant_;
  }

 private:
  int dim_;
  int max_degree_;
  bool include_constant_;
  std::vector<MultiIndex> indices_;
};

MonomialBasis make_basis(int dim, int max_degree, bool include_constant = true,
                         std::size_t size_cap = MonomialBasis::kDefaultSizeCap);

// Binomial coefficient with overflow detection (throws InputError).
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// r^k: feature degree that exposes the vanishing ideal of a k-dimensional
// manifold with a degree-r polynomial generator.
std::uint64_t required_degree(std::uint64_t k, std::uint64_t r);

// binomial(required_degree(k, r) + s, s): default sample count at feature degree s.
std::uint64_t sample_size_bound(std::uint64_t k, std::uint64_t r, std::uint64_t s);

}  // namespace conceptsig
