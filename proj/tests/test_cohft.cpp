#include <gtest/gtest.h>

#include "spinrec/cohft.hpp"

using namespace spinrec;

namespace {

// Closed forms for one-point and genus-zero psi integrals.
Rational one_point(long g) {
  return Rational(1) / (Rational(factorial(g)) * rational_pow(Rational(24), g));
}

Rational genus_zero(const std::vector<long>& d) {
  const long n = static_cast<long>(d.size());
  Integer num = factorial(n - 3);
  Integer den = 1;
  for (long x : d) den *= factorial(x);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace

TEST(Dimension, WittenDegree) {
  EXPECT_EQ(witten_dimension(3, 0, {1, 1, 1, 1}), 1);
  EXPECT_EQ(witten_dimension(3, 0, {0, 0, 1}), 0);
  EXPECT_FALSE(witten_dimension(3, 0, {0, 0, 0}).has_value());
  EXPECT_EQ(witten_dimension(4, 1, {2}), std::optional<long>());
  EXPECT_THROW(witten_dimension(3, 0, {2}), std::invalid_argument);
}

TEST(Dvv, BaseValuesAndClosedForms) {
  EXPECT_EQ(dvv_intersection(0, {0, 0, 0}), 1);
  EXPECT_EQ(dvv_intersection(1, {1}), make_rational(1, 24));
  EXPECT_EQ(dvv_intersection(2, {4}), make_rational(1, 1152));
  EXPECT_EQ(dvv_intersection(1, {0}), 0);
  for (long g = 1; g <= 5; ++g) EXPECT_EQ(dvv_intersection(g, {3 * g - 2}), one_point(g)) << g;
  EXPECT_EQ(dvv_intersection(0, {1, 1, 0, 0, 0}), genus_zero({1, 1, 0, 0, 0}));
  EXPECT_EQ(dvv_intersection(0, {2, 1, 0, 0, 0, 0}), genus_zero({2, 1, 0, 0, 0, 0}));
  EXPECT_EQ(dvv_intersection(2, {2, 3}), make_rational(29, 5760));
  EXPECT_EQ(dvv_intersection(3, {7}), make_rational(1, 82944));
}

TEST(Dvv, StringAndDilaton) {
  // <tau_0 tau_{d}> reduces by the string equation; <tau_1 ...> by the dilaton equation.
  EXPECT_EQ(dvv_intersection(1, {2, 0}), dvv_intersection(1, {1}));
  EXPECT_EQ(dvv_intersection(2, {4, 1}), Rational(2 * 2 - 2 + 1) * dvv_intersection(2, {4}));
  EXPECT_EQ(dvv_intersection(2, {4, 1, 1}), Rational(4) * dvv_intersection(2, {4, 1}));
}

TEST(StableGraphs, Counts) {
  EXPECT_EQ(enumerate_stable_graphs(0, 3).size(), 1u);
  EXPECT_EQ(enumerate_stable_graphs(0, 4).size(), 4u);
  const auto g11 = enumerate_stable_graphs(1, 1);
  ASSERT_EQ(g11.size(), 2u);
  long loop_aut = 0;
  for (const auto& gr : g11)
    if (gr.edges.size() == 1) loop_aut = gr.automorphisms;
  EXPECT_EQ(loop_aut, 2);
  EXPECT_EQ(enumerate_stable_graphs(2, 0).size(), 7u);
  EXPECT_EQ(enumerate_stable_graphs(1, 2).size(), 5u);
  for (const auto& gr : enumerate_stable_graphs(2, 1)) EXPECT_EQ(gr.total_genus(), 2);
}

TEST(StableGraphs, AutomorphismWeightedCount) {
  // Sum of 1/|Aut| over genus-2 unmarked graphs.
  Rational total(0);
  for (const auto& gr : enumerate_stable_graphs(2, 0)) total += Rational(1) / Rational(gr.automorphisms);
  EXPECT_EQ(total, Rational(1) + make_rational(1, 2) + make_rational(1, 8) + make_rational(1, 2) + make_rational(1, 2) +
                       make_rational(1, 8) + make_rational(1, 12));
}

TEST(StableGraphs, DilatonDecoration) {
  const auto plain = enumerate_stable_graphs(1, 1);
  const auto decorated = enumerate_stable_graphs(1, 1, 1);
  // Only the smooth vertex can carry a leaf (power 2); the loop vertex has no room.
  EXPECT_EQ(plain.size() + 1, decorated.size());
  const auto g2 = enumerate_stable_graphs(0, 4, 1);
  EXPECT_GT(g2.size(), enumerate_stable_graphs(0, 4).size());
}

TEST(Trivial, RankOneReproducesPsiIntegrals) {
  CohftSpec spec = trivial_spec(2, [](long, const std::vector<long>&) { return Rational(1); }, 8);
  EXPECT_EQ(givental_correlator(spec, 2, {{0, 4}}), make_rational(1, 1152));
  EXPECT_EQ(givental_correlator(spec, 1, {{0, 2}, {0, 0}}), make_rational(1, 24));
}

TEST(Spec, TftNormalization) {
  const CohftSpec hat = hat_spec(3, 1, 6);
  const CohftSpec tilde = tilde_spec(3, 1, 6);
  EXPECT_EQ(hat.tft(0, {0, 0, 1}), 1);
  EXPECT_EQ(tilde.tft(0, {0, 0, 1}), 1);
  EXPECT_EQ(hat.tft(0, {0, 0, 0}), 0);
  EXPECT_EQ(hat.tft(0, {0, 1, 1}), 0);
  EXPECT_EQ(tilde.tft(0, {1, 1, 1}), 1);
  EXPECT_EQ(hat_tft(3, 2, 0, {1, 1, 1}), 4);
  EXPECT_EQ(hat_tft(3, 2, 0, {0, 1, 1}), 0);
  EXPECT_EQ(tilde_tft(4, 2, 1, {}), 3);
}

TEST(Spec, HatRMatrixEntries) {
  const CohftSpec s = hat_spec(3, 1, 6);
  EXPECT_EQ(s.rinv.coeffs[2][0][0], make_rational(385, 41472));
  EXPECT_EQ(s.rinv.coeffs[1][1][0], make_rational(-5, 144));
  EXPECT_EQ(s.rinv.coeffs[1][0][0], 0);
  EXPECT_EQ(s.translation.at_power(2, 1), make_rational(5, 144));
  EXPECT_EQ(s.translation.at_power(2, 0), 0);
  const auto [tl, tr] = unit_translations(s.rinv, 0);
  EXPECT_EQ(tl.at_power(3, 0), -tr.at_power(3, 0));
  EXPECT_EQ(tr.at_power(3, 0), -s.rinv.coeffs[2][0][0]);
}

TEST(Spec, SymplecticCondition) {
  for (long r = 3; r <= 5; ++r) {
    Report a = check_symplectic(hat_spec(r, 1, 10).rinv, FrobeniusData{r}, 10);
    EXPECT_TRUE(a.passed()) << a.summary();
    Report b = check_symplectic(tilde_spec(r, make_rational(3, 2), 10).rinv, FrobeniusData{r}, 10);
    EXPECT_TRUE(b.passed()) << b.summary();
  }
}

TEST(Spec, BrokenRMatrixIsRejected) {
  CohftSpec s = hat_spec(3, 1, 6);
  s.rinv.coeffs[2][0][0] += 1;
  EXPECT_FALSE(check_symplectic(s.rinv, s.frobenius, 4).passed());
  EXPECT_THROW(edge_series(s.rinv, s.frobenius, 4), ConsistencyError);
}

TEST(Correlator, GenusZeroThreePointIsTft) {
  for (const CohftSpec& s : {hat_spec(4, 1, 6), tilde_spec(4, 2, 6)})
    for (long a = 0; a < 3; ++a)
      for (long b = 0; b < 3; ++b)
        for (long c = 0; c < 3; ++c)
          EXPECT_EQ(givental_correlator(s, 0, {{a, 0}, {b, 0}, {c, 0}}), s.tft(0, {a, b, c}));
}

TEST(Correlator, TranslationOrderIndependence) {
  const CohftSpec hat = hat_spec(3, 1, 10);
  const CohftSpec tilde = tilde_spec(4, 2, 10);
  for (const CohftSpec* s : {&hat, &tilde}) {
    const long d = s->frobenius.dim();
    for (long a = 0; a < d; ++a) {
      EXPECT_EQ(givental_correlator(*s, 1, {{a, 0}}), givental_correlator_translate_after(*s, 1, {{a, 0}}));
      EXPECT_EQ(givental_correlator(*s, 1, {{a, 1}}), givental_correlator_translate_after(*s, 1, {{a, 1}}));
      for (long b = 0; b < d; ++b) {
        EXPECT_EQ(givental_correlator(*s, 0, {{a, 0}, {b, 0}, {0, 1}, {d - 1, 0}}),
                  givental_correlator_translate_after(*s, 0, {{a, 0}, {b, 0}, {0, 1}, {d - 1, 0}}));
        EXPECT_EQ(givental_correlator(*s, 1, {{a, 0}, {b, 1}}),
                  givental_correlator_translate_after(*s, 1, {{a, 0}, {b, 1}}));
      }
    }
  }
}

TEST(Correlator, StringEquation) {
  // Inserting the unit with no psi lowers one psi power elsewhere.
  const CohftSpec s = tilde_spec(3, 2, 10);
  for (long a = 0; a < 2; ++a) {
    EXPECT_EQ(givental_correlator(s, 1, {{a, 1}, {0, 0}}), givental_correlator(s, 1, {{a, 0}}));
    EXPECT_EQ(givental_correlator(s, 0, {{a, 1}, {1, 0}, {1, 0}, {0, 0}}),
              givental_correlator(s, 0, {{a, 0}, {1, 0}, {1, 0}}));
  }
}

TEST(Correlator, QuantumProductIsUnital) {
  const CohftSpec s = hat_spec(5, 3, 4);
  for (long a = 0; a < 4; ++a) {
    std::vector<Rational> e(4, Rational(0));
    e[static_cast<std::size_t>(a)] = 1;
    EXPECT_EQ(quantum_product(s, 0, a), e);
  }
  // v_1 . v_1 in the hat family at lambda = 1 picks up the deformation along v_{r-2}.
  const auto p = quantum_product(hat_spec(3, 1, 4), 1, 1);
  EXPECT_EQ(p[0], 1);
  EXPECT_EQ(p[1], 0);
}

TEST(Correlator, RejectsBadInput) {
  const CohftSpec s = hat_spec(3, 1, 4);
  EXPECT_THROW(givental_correlator(s, 0, {{0, 0}, {0, 0}}), std::invalid_argument);
  EXPECT_THROW(givental_correlator(s, 0, {{0, 0}, {0, 0}, {5, 0}}), std::invalid_argument);
  EXPECT_EQ(givental_correlator(s, 0, {{0, 1}, {0, 0}, {0, 0}}), 0);
}

TEST(Table, EnumeratesMultisets) {
  EXPECT_EQ(insertion_multisets(2, 0, 3).size(), 4u);
  EXPECT_EQ(insertion_multisets(1, 1, 1).size(), 2u);
  const IntersectionTable t = givental_table(tilde_spec(3, 1, 6), 0, 3);
  EXPECT_EQ(t.entries.size(), 4u);
  EXPECT_EQ(t.get(0, {{1, 0}, {0, 0}, {0, 0}}), Rational(1));
}
