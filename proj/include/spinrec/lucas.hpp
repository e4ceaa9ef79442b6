#pragma once

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "spinrec/report.hpp"
#include "spinrec/scalar.hpp"
#include "spinrec/symbolic.hpp"

namespace spinrec {

/// Polynomial in w whose coefficients are polynomials in t.
template <class T>
using Bivariate = Polynomial<Polynomial<T>>;
using BivariatePolynomial = Bivariate<Rational>;

namespace lucas_detail {

template <class T>
Bivariate<T> w_var() {
  return Bivariate<T>::monomial(Polynomial<T>(T(1)), 1);
}

template <class T>
Bivariate<T> const_in_w(const Polynomial<T>& p) {
  return Bivariate<T>(p);
}

template <class T>
Bivariate<T> t_power(long k) {
  return const_in_w<T>(Polynomial<T>::monomial(T(1), static_cast<std::size_t>(k)));
}

// U_n or V_n with t replaced by the given polynomial tau (tau = t or tau = s^2).
template <class T>
std::pair<Bivariate<T>, Bivariate<T>> sequence(long n, const Polynomial<T>& tau, const Bivariate<T>& seed0,
                                               const Bivariate<T>& seed1) {
  Bivariate<T> prev = seed0, cur = seed1;
  if (n == 0) return {prev, cur};
  const Bivariate<T> w = w_var<T>();
  const Bivariate<T> tt = const_in_w<T>(tau);
  for (long k = 1; k < n; ++k) {
    Bivariate<T> next = w * cur - tt * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return {cur, prev};
}

}  // namespace lucas_detail

/// U_n(w, tau) for a general substitution t -> tau.
template <class T>
Bivariate<T> lucas_u_in(long n, const Polynomial<T>& tau) {
  if (n < 0) throw std::invalid_argument("lucas index must be nonnegative");
  return lucas_detail::sequence<T>(n, tau, Bivariate<T>(), Bivariate<T>(Polynomial<T>(T(1)))).first;
}

/// V_n(w, tau) for a general substitution t -> tau.
template <class T>
Bivariate<T> lucas_v_in(long n, const Polynomial<T>& tau) {
  if (n < 0) throw std::invalid_argument("lucas index must be nonnegative");
  if (n == 0) return Bivariate<T>(Polynomial<T>(T(2)));
  return lucas_detail::sequence<T>(n, tau, Bivariate<T>(Polynomial<T>(T(2))), lucas_detail::w_var<T>()).first;
}

inline BivariatePolynomial lucas_u(long n) { return lucas_u_in<Rational>(n, Polynomial<Rational>::x()); }
inline BivariatePolynomial lucas_v(long n) { return lucas_v_in<Rational>(n, Polynomial<Rational>::x()); }

/// Delta = w^2 - 4t.
inline BivariatePolynomial discriminant() {
  auto w = lucas_detail::w_var<Rational>();
  return w * w - BivariatePolynomial(Rational(4)) * lucas_detail::t_power<Rational>(1);
}

template <class T>
Bivariate<T> d_w(const Bivariate<T>& p) {
  return p.derivative();
}
template <class T>
Bivariate<T> d_t(const Bivariate<T>& p) {
  return p.map([](const Polynomial<T>& c) { return c.derivative(); });
}

/// Specializes t to a value, giving a polynomial in w.
template <class T>
Polynomial<T> at_t(const Bivariate<T>& p, const T& t) {
  return p.map([&](const Polynomial<T>& c) { return c.evaluate(t); });
}

/// True when every monomial w^i t^j satisfies i + 2j = weight, i.e. p(aw, a^2 t) = a^weight p(w, t).
template <class T>
bool is_quasi_homogeneous(const Bivariate<T>& p, long weight) {
  for (long i = 0; i <= p.degree(); ++i) {
    const auto& c = p.coeff(i);
    for (long j = 0; j <= c.degree(); ++j)
      if (!is_zero(c.coeff(j)) && i + 2 * j != weight) return false;
  }
  return true;
}

/// Chebyshev polynomials of the first (kind = 1) and second (kind = 2) kind.
inline Polynomial<Rational> chebyshev(int kind, long n) {
  using P = Polynomial<Rational>;
  const P x = P::x();
  P prev(Rational(1));
  P cur = kind == 1 ? x : P(Rational(2)) * x;
  if (n == 0) return prev;
  for (long k = 1; k < n; ++k) {
    P next = P(Rational(2)) * x * cur - prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Table and derivative identities for 1 <= n <= n_max, plus the Chebyshev bridge and quasi-homogeneity.
inline Report verify_lucas_identities(long n_max) {
  if (n_max < 2) throw std::invalid_argument("verify_lucas_identities requires n_max >= 2");
  using B = BivariatePolynomial;
  Report rep;
  const B w = lucas_detail::w_var<Rational>();
  const B t = lucas_detail::t_power<Rational>(1);
  const B delta = discriminant();
  std::vector<B> U, V;
  for (long n = 0; n <= n_max + 1; ++n) {
    U.push_back(lucas_u(n));
    V.push_back(lucas_v(n));
  }
  const Polynomial<Rational> half_w(std::vector<Rational>{Rational(0), Rational(1, 2)});
  for (long n = 1; n <= n_max; ++n) {
    const std::string tag = " at n=" + std::to_string(n);
    const std::size_t i = static_cast<std::size_t>(n);
    const B tn1 = lucas_detail::t_power<Rational>(n - 1);
    const B nn{Rational(n)};
    rep.record(U[i] * U[i] == tn1 + U[i + 1] * U[i - 1], "U_n^2 = t^{n-1} + U_{n+1}U_{n-1}" + tag);
    rep.record(V[i] * V[i] == -(delta * tn1) + V[i + 1] * V[i - 1], "V_n^2 = -Delta t^{n-1} + V_{n+1}V_{n-1}" + tag);
    rep.record(w * U[i] == V[i] + B(Rational(2)) * t * U[i - 1], "wU_n = V_n + 2tU_{n-1}" + tag);
    rep.record(w * V[i] == delta * U[i] + B(Rational(2)) * t * V[i - 1], "wV_n = Delta U_n + 2tV_{n-1}" + tag);
    rep.record(delta * d_t(U[i]) == -(B(Rational(n - 1)) * V[i - 1] - w * U[i - 1]),
               "Delta dU_n/dt = -((n-1)V_{n-1} - wU_{n-1})" + tag);
    rep.record(delta * d_w(U[i]) == nn * V[i] - w * U[i], "Delta dU_n/dw = nV_n - wU_n" + tag);
    rep.record(d_t(V[i]) == -(nn * U[i - 1]), "dV_n/dt = -nU_{n-1}" + tag);
    rep.record(d_w(V[i]) == nn * U[i], "dV_n/dw = nU_n" + tag);
    rep.record(is_quasi_homogeneous(U[i], n - 1), "U_n quasi-homogeneous of weight n-1" + tag);
    rep.record(is_quasi_homogeneous(V[i], n), "V_n quasi-homogeneous of weight n" + tag);
    rep.record(at_t(U[i], Rational(1)) == chebyshev(2, n - 1).compose(half_w), "U_n(w,1) = U_{n-1}(w/2)" + tag);
    rep.record(at_t(V[i], Rational(1)) == Polynomial<Rational>(Rational(2)) * chebyshev(1, n).compose(half_w),
               "V_n(w,1) = 2T_n(w/2)" + tag);
  }
  return rep;
}

/// A term c * t^e of the partial-fraction identity, with e a half-integer.
struct UrootTerm {
  long p;
  Rational t_power;
  Cyclotomic coeff;
};

/// Coefficients of U_{p+1}(w,t) in U_r / (w - 2 sqrt(t) cos(k pi / r)), p = 0..r-2.
inline std::vector<UrootTerm> uroot_expansion(long r, long k) {
  if (r < 3 || k < 1 || k > r - 1) throw std::invalid_argument("uroot_expansion requires r >= 3 and 1 <= k <= r-1");
  std::vector<UrootTerm> out;
  const Cyclotomic sign = (k % 2 == 1) ? Cyclotomic(1) : Cyclotomic(-1);
  const Cyclotomic denom = sine_value(k, r);
  for (long p = 0; p <= r - 2; ++p)
    out.push_back({p, make_rational(r - p - 2, 2), sign * sine_value((p + 1) * k, r) / denom});
  return out;
}

/// Verifies the partial-fraction identity with t = s^2, as a polynomial identity in (w, s).
inline Report verify_uroot(long r, long k) {
  using C = Cyclotomic;
  using B = Bivariate<C>;
  Report rep;
  const Polynomial<C> s = Polynomial<C>::x();
  const Polynomial<C> tau = s * s;
  B lhs;
  const B factor = lucas_detail::w_var<C>() - B(Polynomial<C>(C(2) * cosine_value(k, r)) * s);
  for (const auto& term : uroot_expansion(r, k)) {
    const long s_pow = r - term.p - 2;
    const Polynomial<C> coef = Polynomial<C>::monomial(term.coeff, static_cast<std::size_t>(s_pow));
    lhs += B(coef) * lucas_u_in<C>(term.p + 1, tau);
  }
  rep.record(lhs * factor == lucas_u_in<C>(r, tau), "U_r root factorization at r=" + std::to_string(r) +
                                                         " k=" + std::to_string(k));
  return rep;
}

/// Polynomial form (multiplied through by t r^2) of the Lucas relation behind the ODE of the Airy-Lucas functions.
inline Report verify_airy_lucas_ode_identity(long r, long a) {
  if (r < 2 || a < 0 || a > r - 2) throw std::invalid_argument("ODE identity requires 0 <= a <= r-2");
  using B = BivariatePolynomial;
  Report rep;
  const B t = lucas_detail::t_power<Rational>(1);
  const B U = lucas_u(a + 1), V = lucas_v(r), Ur2 = lucas_u(r - 2);
  const B Ud = d_t(U), Udd = d_t(Ud), Vd = d_t(V), Vdd = d_t(Vd);
  const B Uw = d_w(U), Uww = d_w(Uw), Vw = d_w(V);
  const B R{Rational(r)}, R2{Rational(r * r)}, A{Rational(a)};
  const B tr1 = lucas_detail::t_power<Rational>(r - 1);
  const B lhs = t * R2 * Udd + B(Rational(2)) * t * R * Ud * Vd + t * R * U * Vdd + t * U * Vd * Vd -
                tr1 * R2 * U - A * R2 * Ud - A * R * U * Vd;
  const B rhs = t * R2 * Uw * Ur2 + t * R2 * U * d_w(Ur2) + R2 * Uww + t * R * U * Ur2 * Vw + R * Uw * Vw;
  const std::string tag = " at r=" + std::to_string(r) + " a=" + std::to_string(a);
  rep.record(lhs == rhs, "ODE integrand equals the w-derivative combination" + tag);
  // The right side is t r^2 times d/dw[F e^{V_r/r}] e^{-V_r/r} with F = U_{a+1}U_{r-2} + U_{a+1}'/t.
  const B tF = t * U * Ur2 + Uw;
  rep.record(R2 * d_w(tF) + R * tF * Vw == rhs, "right side is a total w-derivative" + tag);
  return rep;
}

/// d/dw(w) + w dV_r/dw / r = 1 + wU_r.
inline Report verify_lid_identity(long r) {
  if (r < 2) throw std::invalid_argument("Lid identity requires r >= 2");
  using B = BivariatePolynomial;
  Report rep;
  const B w = lucas_detail::w_var<Rational>();
  const B lhs = d_w(w) + w * d_w(lucas_v(r)) * B(Rational(1, r));
  rep.record(lhs == B(Rational(1)) + w * lucas_u(r), "Lid identity at r=" + std::to_string(r));
  return rep;
}

}  // namespace spinrec
