#include <gtest/gtest.h>

#include "spinrec/lucas.hpp"

using namespace spinrec;
using B = BivariatePolynomial;
using P = Polynomial<Rational>;

namespace {

// Builds sum c_ij w^i t^j from a list of (i, j, c).
B poly(std::initializer_list<std::tuple<long, long, long>> terms) {
  B out;
  for (auto [i, j, c] : terms)
    out += B::monomial(P::monomial(Rational(c), static_cast<std::size_t>(j)), static_cast<std::size_t>(i));
  return out;
}

}  // namespace

TEST(Lucas, SeedsAndTableEntries) {
  EXPECT_TRUE(lucas_u(0).is_zero());
  EXPECT_EQ(lucas_u(1), B(Rational(1)));
  EXPECT_EQ(lucas_u(4), poly({{3, 0, 1}, {1, 1, -2}}));
  EXPECT_EQ(lucas_v(6), poly({{6, 0, 1}, {4, 1, -6}, {2, 2, 9}, {0, 3, -2}}));
  EXPECT_EQ(lucas_v(4), poly({{4, 0, 1}, {2, 1, -4}, {0, 2, 2}}));
}

TEST(Lucas, SingleDerivativeCheck) {
  EXPECT_EQ(d_t(lucas_v(4)), poly({{2, 0, -4}, {0, 1, 4}}));
  EXPECT_EQ(d_t(lucas_v(4)), B(Rational(-4)) * lucas_u(3));
}

TEST(Lucas, IdentitySuite) {
  Report small = verify_lucas_identities(6);
  EXPECT_TRUE(small.passed()) << small.summary();
  Report full = verify_lucas_identities(20);
  EXPECT_TRUE(full.passed()) << full.summary();
  EXPECT_EQ(full.checks, 20 * 12);
}

TEST(Lucas, QuasiHomogeneityDetectsWrongWeight) {
  EXPECT_TRUE(is_quasi_homogeneous(lucas_u(5), 4));
  EXPECT_FALSE(is_quasi_homogeneous(lucas_u(5), 5));
  EXPECT_FALSE(is_quasi_homogeneous(lucas_u(5) + B(Rational(1)), 4));
}

TEST(Lucas, UrootExamples) {
  auto terms = uroot_expansion(3, 1);
  ASSERT_EQ(terms.size(), 2u);
  EXPECT_EQ(terms[0].t_power, Rational(1, 2));
  EXPECT_EQ(terms[0].coeff, Cyclotomic(1));
  EXPECT_EQ(terms[1].t_power, Rational(0));
  EXPECT_EQ(terms[1].coeff, Cyclotomic(1));
  for (long r = 3; r <= 8; ++r)
    for (long k = 1; k < r; ++k) {
      EXPECT_EQ(uroot_expansion(r, k).back().coeff, Cyclotomic(1)) << r << " " << k;
      Report rep = verify_uroot(r, k);
      EXPECT_TRUE(rep.passed()) << rep.summary();
    }
}

TEST(Lucas, UrootFourTwoByDivision) {
  // cos(pi/2) = 0, so the quotient is U_4 / w = w^2 - 2t.
  auto terms = uroot_expansion(4, 2);
  EXPECT_EQ(terms[0].coeff, Cyclotomic(-1));  // times t^1 U_1
  EXPECT_TRUE(terms[1].coeff.is_zero());
  EXPECT_EQ(terms[2].coeff, Cyclotomic(1));  // U_3 = w^2 - t
}

TEST(Lucas, AiryLucasOdeIdentity) {
  for (long r = 2; r <= 6; ++r)
    for (long a = 0; a <= r - 2; ++a) {
      Report rep = verify_airy_lucas_ode_identity(r, a);
      EXPECT_TRUE(rep.passed()) << rep.summary();
    }
}

TEST(Lucas, LidIdentity) {
  for (long r = 2; r <= 8; ++r) EXPECT_TRUE(verify_lid_identity(r).passed()) << r;
  // w = 0 slice: both sides are 1.
  EXPECT_EQ(at_t(lucas_u(3), Rational(0)).evaluate(Rational(0)), 0);
}
