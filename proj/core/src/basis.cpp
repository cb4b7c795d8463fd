#include "conceptsig/basis.hpp"

#include <limits>
#include <numeric>
#include <sstream>

#include "conceptsig/error.hpp"

namespace conceptsig {

namespace {

constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > kMax / a) throw InputError(std::string(what) + ": integer overflow");
  return a * b;
}

// Appends all exponent vectors of total degree `remaining` over variables
// [var, dim) in decreasing-lex order.
void enumerate_degree(int dim, int var, int remaining, std::vector<int>& current,
                      int degree, std::vector<MultiIndex>& out) {
  if (var == dim - 1) {
    current[var] = remaining;
    out.push_back(MultiIndex{current, degree});
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    enumerate_degree(dim, var + 1, remaining - e, current, degree, out);
  }
  current[var] = 0;
}

}  // namespace

MonomialBasis::MonomialBasis(int dim, int max_degree, bool include_constant,
                             std::size_t size_cap)
    : dim_(dim), max_degree_(max_degree), include_constant_(include_constant) {
  if (dim < 1) throw InputError("monomial basis: dimension must be >= 1");
  if (max_degree < 1) throw InputError("monomial basis: degree must be >= 1");

  std::uint64_t full = 0;
  try {
    full = binomial(static_cast<std::uint64_t>(dim) + max_degree, max_degree);
  } catch (const InputError&) {
    full = kMax;
  }
  const std::uint64_t size = include_constant ? full : full - 1;
  if (size > size_cap) {
    std::ostringstream msg;
    msg << "monomial basis too large: binomial(" << dim << "+" << max_degree << ", "
        << max_degree << ") exceeds the size cap " << size_cap;
    throw InputError(msg.str());
  }

  indices_.reserve(size);
  std::vector<int> current(dim, 0);
  for (int q = include_constant ? 0 : 1; q <= max_degree; ++q)
    enumerate_degree(dim, 0, q, current, q, indices_);
}

Eigen::VectorXd MonomialBasis::embed(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim_) {
    std::ostringstream msg;
    msg << "embed: point has dimension " << x.size() << ", basis expects " << dim_;
    throw InputError(msg.str());
  }
  // powers(j, e) = x_j^e
  Eigen::MatrixXd powers(dim_, max_degree_ + 1);
  for (int j = 0; j < dim_; ++j) {
    powers(j, 0) = 1.0;
    for (int e = 1; e <= max_degree_; ++e) powers(j, e) = powers(j, e - 1) * x(j);
  }
  Eigen::VectorXd phi(static_cast<Eigen::Index>(indices_.size()));
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    double v = 1.0;
    const auto& ex = indices_[i].exponents;
    for (int j = 0; j < dim_; ++j)
      if (ex[j] != 0) v *= powers(j, ex[j]);
    phi(static_cast<Eigen::Index>(i)) = v;
  }
  return phi;
}

Eigen::MatrixXd MonomialBasis::embed_rows(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  if (points.cols() != dim_) {
    std::ostringstream msg;
    msg << "embed: points have dimension " << points.cols() << ", basis expects " << dim_;
    throw InputError(msg.str());
  }
  Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(size()));
  for (Eigen::Index r = 0; r < points.rows(); ++r)
    out.row(r) = embed(points.row(r).transpose()).transpose();
  return out;
}

std::string MonomialBasis::monomial_name(std::size_t i) const {
  const auto& ex = indices_.at(i).exponents;
  std::ostringstream out;
  bool first = true;
  for (int j = 0; j < dim_; ++j) {
    if (ex[j] == 0) continue;
    if (!first) out << '*';
    out << 'x' << (j + 1);
    if (ex[j] > 1) out << '^' << ex[j];
    first = false;
  }
  return first ? std::string("1") : out.str();
}

MonomialBasis make_basis(int dim, int max_degree, bool include_constant, std::size_t size_cap) {
  return MonomialBasis(dim, max_degree, include_constant, size_cap);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (n - k + i) / i is exact at every step; divide by the gcd first
    // to delay overflow.
    std::uint64_t num = n - k + i;
    std::uint64_t den = i;
    std::uint64_t g = std::gcd(result, den);
    result /= g;
    den /= g;
    num /= den;
    result = checked_mul(result, num, "binomial");
  }
  return result;
}

std::uint64_t required_degree(std::uint64_t k, std::uint64_t r) {
  if (k < 1 || r < 1) throw InputError("required_degree: k and r must be >= 1");
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out = checked_mul(out, r, "required_degree");
  return out;
}

std::uint64_t sample_size_bound(std::uint64_t k, std::uint64_t r, std::uint64_t s) {
  if (k < 1 || r < 1 || s < 1) throw InputError("sample_size_bound: arguments must be >= 1");
  const std::uint64_t kr = required_degree(k, r);
  if (kr > kMax - s) throw InputError("sample_size_bound: integer overflow");
  return binomial(kr + s, s);
}

}  // namespace conceptsig
