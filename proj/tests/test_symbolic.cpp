#include <gtest/gtest.h>

#include <random>

#include "spinrec/symbolic.hpp"

using namespace spinrec;

using RS = Series<Rational>;
using RPoly = Polynomial<Rational>;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

RS random_series(std::mt19937& rng, long val, long prec) {
  std::uniform_int_distribution<int> dist(-5, 5);
  std::vector<Rational> c;
  for (long e = val; e < prec; ++e) c.push_back(q(dist(rng), 1 + std::abs(dist(rng))));
  if (is_zero(c[0])) c[0] = 1;
  return RS(val, c, prec);
}

}  // namespace

TEST(Polynomial, ArithmeticAndDivision) {
  RPoly x = RPoly::x();
  RPoly p = x * x - RPoly(1);
  auto [quot, rem] = divmod(p, x - RPoly(1));
  EXPECT_EQ(quot, x + RPoly(1));
  EXPECT_TRUE(rem.is_zero());
  EXPECT_EQ(gcd(p, x * x + x * RPoly(2) + RPoly(1)), x + RPoly(1));
  EXPECT_EQ(p.shift(q(1)), x * x + x * RPoly(2));
  EXPECT_EQ(p.evaluate(q(3)), q(8));
}

TEST(RationalFunction, NormalizesByGcd) {
  RPoly x = RPoly::x();
  RationalFunction<Rational> f(x * x - RPoly(1), RPoly(2) * (x - RPoly(1)));
  EXPECT_EQ(f.denominator(), RPoly(1));
  EXPECT_EQ(f.numerator(), (x + RPoly(1)) * RPoly(q(1, 2)));
}

TEST(Series, TruncationIsLoud) {
  RS s(0, {q(1), q(2)}, 3);
  EXPECT_EQ(s.coeff(2), 0);
  EXPECT_THROW(s.coeff(3), TruncationError);
  RS t = s * s;
  EXPECT_EQ(t.precision(), 3);
  EXPECT_EQ(t.coeff(2), 4);
}

TEST(Series, LaurentExpandExamples) {
  RPoly x = RPoly::x();
  RationalFunction<Rational> f(RPoly(1), x - RPoly(2));
  RS s = laurent_expand(f, q(0), 2);
  EXPECT_EQ(s.coeff(0), q(-1, 2));
  EXPECT_EQ(s.coeff(1), q(-1, 4));
  EXPECT_EQ(s.coeff(2), q(-1, 8));
  EXPECT_THROW(s.coeff(3), TruncationError);

  RS pole = laurent_expand(RationalFunction<Rational>(RPoly(1), x * x), q(0), 0);
  EXPECT_EQ(pole.valuation(), -2);
  EXPECT_EQ(pole.coeff(-2), 1);

  // (z^2 - 1)/(2z) at z = 1: leading term (z-1), then -(z-1)^2/2 from 1/z expansion.
  RationalFunction<Rational> g(x * x - RPoly(1), RPoly(2) * x);
  RS h = laurent_expand(g, q(1), 3);
  EXPECT_EQ(h.valuation(), 1);
  EXPECT_EQ(h.coeff(1), 1);
  EXPECT_EQ(h.coeff(2), q(-1, 2));
  EXPECT_EQ(h.coeff(3), q(1, 2));
}

TEST(Series, ReversionExamples) {
  EXPECT_EQ(reversion(RS(1, {q(1)}, 6)).coeff(1), 1);
  RS half = reversion(RS(1, {q(2)}, 6));
  EXPECT_EQ(half.coeff(1), q(1, 2));
  EXPECT_EQ(half.coeff(2), 0);
  RS cat = reversion(RS::exact(1, {q(1), q(1)}), 6);
  std::vector<long> expected{1, -1, 2, -5, 14};
  for (long n = 1; n <= 5; ++n) EXPECT_EQ(cat.coeff(n), expected[static_cast<std::size_t>(n - 1)]);
  EXPECT_THROW(reversion(RS(2, {q(1)}, 5)), std::domain_error);
}

TEST(Series, ReversionRoundTripRandom) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    RS s = random_series(rng, 1, 10);
    RS r = reversion(s);
    RS id = compose(s, r);
    EXPECT_EQ(id.precision(), 10);
    for (long e = 0; e < 10; ++e) EXPECT_EQ(id.coeff(e), e == 1 ? 1 : 0);
    RS id2 = compose(r, s);
    for (long e = 0; e < id2.precision(); ++e) EXPECT_EQ(id2.coeff(e), e == 1 ? 1 : 0);
  }
}

TEST(Series, SqrtExamples) {
  RS z2(2, {q(1)}, 8);
  EXPECT_EQ(sqrt_series(z2, 1).coeff(1), 1);
  EXPECT_EQ(sqrt_series(z2, -1).coeff(1), -1);
  RS s = sqrt_series(RS(2, {q(1), q(1)}, 8), 1);
  EXPECT_EQ(s.coeff(1), 1);
  EXPECT_EQ(s.coeff(2), q(1, 2));
  EXPECT_EQ(s.coeff(3), q(-1, 8));
  RS t = sqrt_series(RS(0, {q(4), q(1)}, 6), 1);
  EXPECT_EQ(t.coeff(0), 2);
  EXPECT_EQ(t.coeff(1), q(1, 4));
  EXPECT_EQ(t.coeff(2), q(-1, 64));
  EXPECT_THROW(sqrt_series(RS(0, {q(2)}, 4), 1), std::domain_error);
}

TEST(Series, SqrtRoundTripRandom) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    RS base = random_series(rng, 1, 9);
    RS s = base * base;
    RS r = sqrt_series(s, 1);
    RS back = r * r;
    EXPECT_EQ(back.precision(), s.precision());
    for (long e = s.valuation(); e < s.precision(); ++e) EXPECT_EQ(back.coeff(e), s.coeff(e));
  }
}

TEST(Series, SqrtInCyclotomicField) {
  using CS = Series<Cyclotomic>;
  CS s(0, {Cyclotomic(2), Cyclotomic(1)}, 5);
  CS r = sqrt_series(s, 1);
  CS back = r * r;
  for (long e = 0; e < 5; ++e) EXPECT_EQ(back.coeff(e), s.coeff(e));
}

TEST(Series, ResidueOfExactDifferentialVanishes) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    RS f = random_series(rng, -5, 4);
    EXPECT_EQ(f.derivative().residue(), 0);
  }
}

TEST(Series, InverseOfLaurent) {
  RS s(-1, {q(1), q(1)}, 5);
  RS inv = s.inverse();
  RS prod = s * inv;
  for (long e = 0; e < prod.precision(); ++e) EXPECT_EQ(prod.coeff(e), e == 0 ? 1 : 0);
}

TEST(FormalLaplace, MomentsAndLinearity) {
  EXPECT_EQ(formal_laplace(RS::constant(q(1), 6)).coeff(0), 1);
  RS z2 = formal_laplace(RS::monomial(q(1), 2, 8));
  EXPECT_EQ(z2.coeff(1), 1);
  RS z4 = formal_laplace(RS::monomial(q(1), 4, 8));
  EXPECT_EQ(z4.coeff(2), 3);
  RS odd = formal_laplace(RS(1, {q(1), q(0), q(7)}, 8));
  EXPECT_TRUE(odd.is_zero());
  std::mt19937 rng(9);
  RS a = random_series(rng, 0, 10), b = random_series(rng, 0, 10);
  RS lhs = formal_laplace(a + q(3) * b);
  RS rhs = formal_laplace(a) + q(3) * formal_laplace(b);
  for (long k = 0; k < 5; ++k) EXPECT_EQ(lhs.coeff(k), rhs.coeff(k));
}
