#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "conceptsig/basis.hpp"
#include "conceptsig/error.hpp"
#include "conceptsig/rng.hpp"

using namespace conceptsig;

namespace {

// Every exponent tuple with total degree <= ell, by nested counting.
std::vector<std::vector<int>> brute_force_exponents(int d, int ell) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(d, 0);
  while (true) {
    int total = 0;
    for (int v : e) total += v;
    if (total <= ell) out.push_back(e);
    int j = 0;
    while (j < d && ++e[j] > ell) e[j++] = 0;
    if (j == d) break;
  }
  return out;
}

double eval_monomial(const std::vector<int>& e, const Eigen::VectorXd& x) {
  double v = 1.0;
  for (std::size_t j = 0; j < e.size(); ++j) v *= std::pow(x(static_cast<Eigen::Index>(j)), e[j]);
  return v;
}

}  // namespace

TEST(Basis, TwoVariablesDegreeTwoOrder) {
  const MonomialBasis b(2, 2);
  ASSERT_EQ(b.size(), 6u);
  const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(b.indices()[i].exponents, expected[i]) << i;
  EXPECT_EQ(b.monomial_name(0), "1");
  EXPECT_EQ(b.monomial_name(4), "x1*x2");
  EXPECT_EQ(b.monomial_name(5), "x2^2");
}

TEST(Basis, SmallestBasis) {
  const MonomialBasis b(1, 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b.indices()[0].degree, 0);
  EXPECT_EQ(b.indices()[1].exponents, std::vector<int>{1});
}

TEST(Basis, MatchesBruteForceEnumeration) {
  for (int d = 1; d <= 4; ++d) {
    for (int ell = 1; ell <= 4; ++ell) {
      const MonomialBasis b(d, ell);
      const auto all = brute_force_exponents(d, ell);
      ASSERT_EQ(b.size(), all.size()) << d << " " << ell;
      std::set<std::vector<int>> got;
      for (const auto& m : b.indices()) got.insert(m.exponents);
      EXPECT_EQ(got, std::set<std::vector<int>>(all.begin(), all.end()));
    }
  }
  EXPECT_EQ(MonomialBasis(3, 2).size(), 10u);
}

TEST(Basis, GradedLexOrderIsStrict) {
  const MonomialBasis b(3, 3);
  EXPECT_EQ(b.indices().front().degree, 0);
  for (std::size_t i = 1; i < b.size(); ++i) {
    const auto& p = b.indices()[i - 1];
    const auto& q = b.indices()[i];
    if (p.degree != q.degree) {
      EXPECT_LT(p.degree, q.degree);
    } else {
      // Within a degree: lexicographically decreasing exponent vectors.
      EXPECT_TRUE(std::lexicographical_compare(q.exponents.begin(), q.exponents.end(),
                                               p.exponents.begin(), p.exponents.end()));
    }
  }
}

TEST(Basis, HomogeneousDropsConstant) {
  const MonomialBasis b(3, 1, false);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.indices()[0].exponents, (std::vector<int>{1, 0, 0}));
}

TEST(Basis, EmbedHandValues) {
  const MonomialBasis b(2, 2);
  Eigen::VectorXd expect(6);
  expect << 1, 2, 3, 4, 6, 9;
  EXPECT_EQ(b.embed(Eigen::Vector2d(2, 3)), expect);
  expect << 1, 1, 0, 1, 0, 0;
  EXPECT_EQ(b.embed(Eigen::Vector2d(1, 0)), expect);
  const MonomialBasis b4(2, 4);
  const Eigen::VectorXd origin = b4.embed(Eigen::Vector2d::Zero());
  EXPECT_EQ(origin(0), 1.0);
  EXPECT_EQ(origin.tail(origin.size() - 1).cwiseAbs().sum(), 0.0);
}

TEST(Basis, EmbedMatchesPolynomialEvaluation) {
  Rng rng(5);
  const MonomialBasis b(3, 3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = rng.normal_vector(3);
    const Eigen::VectorXd c = rng.normal_vector(static_cast<Eigen::Index>(b.size()));
    double direct = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
      direct += c(static_cast<Eigen::Index>(i)) * eval_monomial(b.indices()[i].exponents, x);
    EXPECT_NEAR(c.dot(b.embed(x)), direct, 1e-12 * (1.0 + std::abs(direct)));
  }
}

TEST(Basis, EmbedInnerProductIsSumOfMonomialProducts) {
  Rng rng(6);
  const MonomialBasis b(2, 4);
  const Eigen::VectorXd x = rng.normal_vector(2), y = rng.normal_vector(2);
  double direct = 0.0;
  for (const auto& m : b.indices()) direct += eval_monomial(m.exponents, x) * eval_monomial(m.exponents, y);
  EXPECT_NEAR(b.embed(x).dot(b.embed(y)), direct, 1e-12 * (1.0 + std::abs(direct)));
}

TEST(Basis, EmbedRowsMatchesEmbed) {
  Rng rng(7);
  const MonomialBasis b(3, 2);
  const Eigen::MatrixXd pts = rng.normal_matrix(5, 3);
  const Eigen::MatrixXd rows = b.embed_rows(pts);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(rows.row(i).transpose(), b.embed(pts.row(i).transpose()));
}

TEST(Basis, Errors) {
  EXPECT_THROW(MonomialBasis(0, 2), InputError);
  EXPECT_THROW(MonomialBasis(2, 0), InputError);
  EXPECT_THROW(MonomialBasis(2, 2).embed(Eigen::Vector3d::Zero()), InputError);
  try {
    MonomialBasis(100, 10);
    FAIL() << "expected size cap error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("20000"), std::string::npos) << e.what();
  }
}

TEST(Basis, Counting) {
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(60, 30), 118264581564861424ull);
  EXPECT_THROW(binomial(200, 100), InputError);

  EXPECT_EQ(required_degree(1, 2), 2u);
  EXPECT_EQ(required_degree(1, 1), 1u);
  EXPECT_EQ(required_degree(2, 3), 9u);
  EXPECT_THROW(required_degree(64, 2), InputError);

  EXPECT_EQ(sample_size_bound(1, 1, 2), 3u);
  EXPECT_EQ(sample_size_bound(1, 2, 2), 6u);
  EXPECT_EQ(sample_size_bound(2, 2, 2), 15u);
}
