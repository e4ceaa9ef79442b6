#include <gtest/gtest.h>

#include "spinrec/limits.hpp"

using namespace spinrec;

TEST(EpsilonFit, ThreePointIsConstant) {
  const EpsilonFit f = epsilon_poly_fit(3, 0, {{0, 0}, {0, 0}, {1, 0}});
  EXPECT_TRUE(f.overdetermined_ok);
  EXPECT_EQ(f.constant_term(), 1);
  for (std::size_t m = 1; m < f.coeffs.size(); ++m) EXPECT_EQ(f.coeffs[m], 0);
}

TEST(EpsilonFit, GenusOneConstantTerm) {
  // The epsilon^0 part is the r = 3 Witten class value (r - 1)/24.
  const EpsilonFit f = epsilon_poly_fit(3, 1, {{0, 1}});
  EXPECT_EQ(f.constant_term(), make_rational(1, 12));
}

TEST(EpsilonFit, ShiftedThreePointPicksUpEpsilon) {
  // <v_1 v_1 v_1>_0 for r = 3 vanishes at epsilon = 0; the shift along v_1 makes it linear in epsilon.
  const EpsilonFit f = epsilon_poly_fit(3, 0, {{1, 0}, {1, 0}, {1, 0}});
  EXPECT_EQ(f.coeffs.at(0), 0);
  EXPECT_EQ(f.coeffs.at(1), 1);
}

TEST(EpsilonFit, SyntheticPolynomialAndFailures) {
  auto cubicish = [](const Rational& l) -> Rational { return Rational(3) + Rational(2) * l * l; };
  const EpsilonFit f = epsilon_poly_fit(CurveFamily::Tilde, 3, 1, {{1, 0}, {1, 0}, {1, 0}}, default_lambda_samples(), cubicish);
  EXPECT_EQ(f.coeffs[0], 3);
  EXPECT_EQ(f.coeffs[1], 2);
  // A value that is not polynomial of the declared degree fails the overdetermined check.
  auto wild = [](const Rational& l) -> Rational { return Rational(1) / l; };
  EXPECT_THROW(epsilon_poly_fit(CurveFamily::Tilde, 3, 1, {{1, 0}}, default_lambda_samples(), wild), ConsistencyError);
  // Too few samples with distinct epsilon (lambda = +-1 collide at r = 3).
  EXPECT_THROW(epsilon_poly_fit(CurveFamily::Tilde, 3, 0, {{0, 0}, {0, 0}, {1, 0}}, {Rational(1), Rational(-1)}, wild),
               std::invalid_argument);
}

TEST(EpsilonFit, Homogeneity) {
  EXPECT_EQ(epsilon_homogeneous_power(CurveFamily::Tilde, 3, 0, {{1, 0}, {1, 0}, {1, 0}}), 1);
  EXPECT_EQ(epsilon_homogeneous_power(CurveFamily::Tilde, 3, 1, {{0, 1}}), 0);
  EXPECT_EQ(epsilon_homogeneous_power(CurveFamily::Tilde, 3, 1, {{0, 0}}), -1);
}

TEST(LimitCheck, RThreeBudgetTwo) {
  const LimitReport rep = limit_check(3, 2);
  EXPECT_TRUE(rep.report.passed()) << rep.report.summary();
  EXPECT_FALSE(rep.exploratory);
  EXPECT_GT(rep.entries.size(), 10u);
}

TEST(LimitCheck, AiryAnchor) {
  const LimitReport rep = limit_check(2, 3);
  EXPECT_TRUE(rep.report.passed());
  EXPECT_FALSE(rep.entries.empty());
}

TEST(LimitCheck, HatIsExploratory) {
  const LimitReport rep = limit_check(3, 1, CurveFamily::Hat);
  EXPECT_TRUE(rep.exploratory);
  EXPECT_FALSE(rep.entries.empty());
}

TEST(LimitCheck, StableRange) {
  const auto pairs = stable_range(2);
  EXPECT_EQ(pairs.size(), 4u);  // (0,3), (0,4), (1,1), (1,2)
}
