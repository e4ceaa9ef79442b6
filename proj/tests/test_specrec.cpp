#include <gtest/gtest.h>

#include "spinrec/specrec.hpp"

using namespace spinrec;

namespace {

Cyclotomic q(long p, long d = 1) { return Cyclotomic(make_rational(p, d)); }

// Expected Witten r-spin genus-zero three-point values: 1 exactly when a1 + a2 + a3 = r - 2.
Rational three_point(long r, long a, long b, long c) { return a + b + c == r - 2 ? Rational(1) : Rational(0); }

}  // namespace

TEST(Curves, RamificationData) {
  const SpectralCurve hat = build_curve(CurveFamily::Hat, 4, 2);
  EXPECT_EQ(hat.ram.size(), 3u);
  EXPECT_EQ(hat.x.coeff(4), 1);
  const SpectralCurve tilde = build_curve(CurveFamily::Tilde, 3, 1);
  EXPECT_EQ(tilde.x.coeff(1), -3);
  EXPECT_EQ(tilde.ram[0].alpha, q(1));
  EXPECT_EQ(tilde.ram[1].alpha, q(-1));
  EXPECT_EQ(tilde.ram[0].x_value, q(-2));
  const SpectralCurve airy = build_curve(CurveFamily::RAiry, 5);
  EXPECT_EQ(airy.ram.size(), 1u);
  EXPECT_EQ(airy.ram[0].order, 4);
  EXPECT_THROW(build_curve(CurveFamily::Hat, 2, 1), std::invalid_argument);
  EXPECT_THROW(build_curve(CurveFamily::Tilde, 3, 0), std::invalid_argument);
}

TEST(Curves, HatAndTildeAgreeAtRThree) {
  // Both reduce to z^3 - 3 lambda^2 z when the tilde shift is lambda^2.
  EXPECT_EQ(build_curve(CurveFamily::Hat, 3, 2).x, build_curve(CurveFamily::Tilde, 3, 2).x);
}

TEST(Involution, CubicExample) {
  const SpectralCurve c = build_curve(CurveFamily::Tilde, 3, 1);
  const CSeries s = local_involution(c, 0, 6);
  EXPECT_EQ(s.coeff(1), q(-1));
  EXPECT_EQ(s.coeff(2), q(-1, 3));
  // sigma is an involution: s(s(t)) = t.
  const CSeries ss = compose(s, s);
  EXPECT_EQ(ss.coeff(1), q(1));
  for (long e = 2; e < 6; ++e) EXPECT_TRUE(ss.coeff(e).is_zero()) << e;
  // x(sigma(z)) = x(z).
  const CPoly x = c.x_cyclotomic().shift(c.ram[0].alpha);
  const CSeries lhs = compose(CSeries::from_polynomial(x), s) - CSeries::from_polynomial(x);
  for (long e = 0; e < 6; ++e) EXPECT_TRUE(lhs.coeff(e).is_zero()) << e;
}

TEST(Eo, AiryBaseCases) {
  const SpectralCurve airy = build_curve(CurveFamily::RAiry, 2);
  const Correlator w03 = eo_recursion(airy, 0, 3);
  ASSERT_EQ(w03.entries.size(), 1u);
  EXPECT_EQ(w03.coeff({{0, 2}, {0, 2}, {0, 2}}), q(-1, 2));
  const Correlator w11 = eo_recursion(airy, 1, 1);
  ASSERT_EQ(w11.entries.size(), 1u);
  EXPECT_EQ(w11.coeff({{0, 4}}), q(-1, 16));
}

TEST(Eo, AiryMatchesKontsevichWitten) {
  const SpectralCurve airy = build_curve(CurveFamily::RAiry, 2);
  for (auto [g, n] : std::vector<std::pair<long, long>>{{0, 4}, {1, 2}, {2, 1}, {0, 5}, {1, 3}, {2, 2}}) {
    const IntersectionTable t = extract_intersections(eo_recursion(airy, g, n), xi_basis(airy), airy);
    for (const auto& [key, v] : t.entries) {
      std::vector<long> d;
      for (const auto& ins : key.second) d.push_back(ins.k);
      EXPECT_EQ(v, dvv_intersection(g, d)) << g << " " << n;
    }
  }
}

TEST(Be, RAiryThreeBaseCase) {
  const Correlator w = be_recursion(3, 0, 3);
  EXPECT_EQ(w.coeff({{0, 2}, {0, 2}, {0, 3}}), q(-2, 3));
  EXPECT_EQ(w.entries.size(), 1u);
}

TEST(Be, SquareRootCaseMatchesEo) {
  const SpectralCurve airy = build_curve(CurveFamily::RAiry, 2);
  for (auto [g, n] : std::vector<std::pair<long, long>>{{0, 3}, {1, 1}, {0, 4}, {1, 2}, {2, 1}}) {
    const Correlator a = be_recursion(2, g, n), b = eo_recursion(airy, g, n);
    EXPECT_EQ(a.entries, b.entries) << g << " " << n;
  }
}

TEST(Xi, RAiryClosedForm) {
  for (long r = 2; r <= 5; ++r) {
    const XiBasis b = xi_basis(build_curve(CurveFamily::RAiry, r));
    for (long a = 0; a <= r - 2; ++a)
      for (long k = 0; k <= 3; ++k) {
        const RFunc expected(RPoly::monomial(rairy_xi_coefficient(r, k, a), 0),
                             RPoly::monomial(Rational(1), static_cast<std::size_t>(k * r + a + 2)));
        EXPECT_EQ(b.dxi(k, a), expected) << r << " " << a << " " << k;
      }
  }
  EXPECT_EQ(rairy_xi_coefficient(3, 0, 1), 2);
}

TEST(Extraction, RAiryThreePointAndOneLoop) {
  for (long r = 3; r <= 5; ++r) {
    const IntersectionTable t = tr_intersections(build_curve(CurveFamily::RAiry, r), 0, 3);
    for (const auto& [key, v] : t.entries) {
      const auto& ins = key.second;
      EXPECT_EQ(v, three_point(r, ins[0].a, ins[1].a, ins[2].a)) << r;
    }
    EXPECT_TRUE(string_dilaton_check(t).passed());
  }
  // Known r = 3 genus-one value.
  const IntersectionTable t = tr_intersections(build_curve(CurveFamily::RAiry, 3), 1, 1);
  EXPECT_EQ(t.get(1, {{0, 1}}), make_rational(1, 12));
}

TEST(Extraction, StringAndDilatonOnRAiry) {
  const SpectralCurve c = build_curve(CurveFamily::RAiry, 3);
  IntersectionTable all;
  for (auto [g, n] : std::vector<std::pair<long, long>>{{0, 3}, {0, 4}, {1, 1}, {1, 2}})
    for (const auto& e : tr_intersections(c, g, n).entries) all.entries.insert(e);
  const Report rep = string_dilaton_check(all);
  EXPECT_TRUE(rep.passed()) << rep.summary();
  EXPECT_GT(rep.checks, 5);
}

TEST(Extraction, FamilyMatchesGivental) {
  for (auto [family, r, lam] : std::vector<std::tuple<CurveFamily, long, Rational>>{
           {CurveFamily::Hat, 3, 1}, {CurveFamily::Tilde, 3, 2}, {CurveFamily::Tilde, 4, make_rational(1, 2)}}) {
    const SpectralCurve c = build_curve(family, r, lam);
    const CohftSpec spec = family == CurveFamily::Hat ? hat_spec(r, lam, 8) : tilde_spec(r, lam, 8);
    for (auto [g, n] : std::vector<std::pair<long, long>>{{0, 3}, {1, 1}}) {
      const IntersectionTable t = tr_intersections(c, g, n);
      for (const auto& [key, v] : t.entries) EXPECT_EQ(v, givental_correlator(spec, g, key.second)) << r << " " << g;
    }
  }
}

TEST(Doss, SlopesAndTranslation) {
  for (long r = 3; r <= 5; ++r)
    for (CurveFamily f : {CurveFamily::Hat, CurveFamily::Tilde}) {
      const SpectralCurve c = build_curve(f, r, 2);
      const DossIngredients d = doss_ingredients(c, standard_constant(c), 4);
      const Report rep = check_doss_translation(d);
      EXPECT_TRUE(rep.passed()) << rep.summary();
      // R^{-1}(0) is the identity.
      for (std::size_t i = 0; i < d.rinv[0].size(); ++i)
        for (std::size_t j = 0; j < d.rinv[0].size(); ++j) EXPECT_EQ(d.rinv[0][j][i], q(i == j ? 1 : 0));
    }
}

TEST(Doss, FlatRMatrixMatchesClosedForms) {
  for (long r = 3; r <= 5; ++r) {
    for (const Rational& lam : {Rational(1), Rational(2), make_rational(1, 3)}) {
      for (CurveFamily f : {CurveFamily::Hat, CurveFamily::Tilde}) {
        const SpectralCurve c = build_curve(f, r, lam);
        const DossIngredients d = doss_ingredients(c, standard_constant(c), 6);
        const MatrixSeries closed = f == CurveFamily::Hat ? hat_closed_form_rinv(r, lam, 6) : tilde_closed_form_rinv(r, lam, 6);
        const MatrixSeries weighted = f == CurveFamily::Hat ? hat_spec(r, lam, 6).rinv : tilde_spec(r, lam, 6).rinv;
        const MatrixSeries a = flat_rinv(c, d, FlatNormalization::ClosedForm);
        const MatrixSeries b = flat_rinv(c, d, FlatNormalization::Weighted);
        for (std::size_t p = 0; p <= 6; ++p) {
          EXPECT_EQ(a.coeffs[p], closed.coeffs[p]) << family_name(f) << " r=" << r << " p=" << p;
          EXPECT_EQ(b.coeffs[p], weighted.coeffs[p]) << family_name(f) << " r=" << r << " p=" << p;
        }
      }
    }
  }
}

TEST(Doss, ConjugationKeepsSymplecticity) {
  const MatrixSeries m = lambda_conjugate(hat_closed_form_rinv(4, 3, 8), 3);
  EXPECT_TRUE(check_symplectic(m, FrobeniusData{4}, 8).passed());
}

TEST(Specrec, RejectsBadInput) {
  const SpectralCurve airy = build_curve(CurveFamily::RAiry, 2);
  EXPECT_THROW(eo_recursion(airy, 0, 2), std::invalid_argument);
  EXPECT_THROW(be_recursion(3, 0, 1), std::invalid_argument);
  EXPECT_THROW(eo_recursion(build_curve(CurveFamily::RAiry, 3), 0, 3), std::invalid_argument);
  EXPECT_THROW(parse_family("banana"), std::invalid_argument);
}
