#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinrec/report.hpp"
#include "spinrec/scalar.hpp"
#include "spinrec/symbolic.hpp"

namespace spinrec {

/// Hypergeometric series B_{r,a}(u) = sum_m b_m u^m.
struct BSeries {
  long r = 0;
  long a = 0;
  std::vector<Rational> b;

  long order() const { return static_cast<long>(b.size()) - 1; }
  /// Same series with odd (parity = 0) or even (parity = 1) coefficients zeroed.
  BSeries parity_part(int parity) const {
    BSeries out = *this;
    for (std::size_t m = 0; m < out.b.size(); ++m)
      if (static_cast<int>(m % 2) != parity) out.b[m] = 0;
    return out;
  }
  BSeries even() const { return parity_part(0); }
  BSeries odd() const { return parity_part(1); }
};

inline BSeries b_series(long r, long a, long order) {
  if (r < 2 || a < 0 || a > r - 2 || order < 0) throw std::invalid_argument("b_series requires 0 <= a <= r-2");
  BSeries out{r, a, {Rational(1)}};
  const Rational scale = make_rational(-1, 16 * r * r);
  Rational acc(1);
  for (long k = 1; k <= order; ++k) {
    acc *= Rational((2 * k - 1) * r - 2 * (a + 1)) * Rational((2 * k - 1) * r + 2 * (a + 1)) * scale / Rational(k);
    out.b.push_back(acc);
  }
  return out;
}

/// Polynomials P_m(r, a) for m <= order and a = 0..r-1.
struct PTable {
  long r = 0;
  std::vector<std::vector<Rational>> values;  // values[m][a]

  long order() const { return static_cast<long>(values.size()) - 1; }
  const Rational& at(long m, long a) const { return values.at(static_cast<std::size_t>(m)).at(static_cast<std::size_t>(a)); }
};

/// Finite sum of terms c t^q e^{kappa t^rho} sharing one exponential factor.
struct GenSeries {
  Cyclotomic kappa;
  Rational rho;
  std::map<Rational, Cyclotomic> terms;

  void add(const Rational& q, const Cyclotomic& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms.emplace(q, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }
  Cyclotomic coeff(const Rational& q) const {
    auto it = terms.find(q);
    return it == terms.end() ? Cyclotomic() : it->second;
  }
};

inline GenSeries derivative(const GenSeries& s) {
  GenSeries out{s.kappa, s.rho, {}};
  const Cyclotomic kr = s.kappa * Cyclotomic(s.rho);
  for (const auto& [q, c] : s.terms) {
    out.add(Rational(q + s.rho - 1), c * kr);
    out.add(Rational(q - 1), c * Cyclotomic(q));
  }
  return out;
}

inline GenSeries scale(const GenSeries& s, const Cyclotomic& c, const Rational& t_shift) {
  GenSeries out{s.kappa, s.rho, {}};
  for (const auto& [q, v] : s.terms) out.add(Rational(q + t_shift), v * c);
  return out;
}

inline GenSeries operator-(const GenSeries& a, const GenSeries& b) {
  GenSeries out = a;
  for (const auto& [q, c] : b.terms) out.add(q, -c);
  return out;
}

namespace asym_detail {

// Hyper-Airy operator u^{(r-1)} - (-1)^{r-1} t u.
inline GenSeries hyper_operator(const GenSeries& u, long r) {
  GenSeries d = u;
  for (long i = 0; i < r - 1; ++i) d = derivative(d);
  return d - scale(u, Cyclotomic((r - 1) % 2 ? -1 : 1), Rational(1));
}

// Airy-Lucas operator u'' - t^{r-2} u - (a/t) u'.
inline GenSeries lucas_operator(const GenSeries& u, long r, long a) {
  GenSeries d1 = derivative(u);
  GenSeries d2 = derivative(d1);
  return d2 - scale(u, Cyclotomic(1), Rational(r - 2)) - scale(d1, Cyclotomic(a), Rational(-1));
}

inline std::optional<Rational> top_exponent(const GenSeries& s) {
  if (s.terms.empty()) return std::nullopt;
  return s.terms.rbegin()->first;
}

}  // namespace asym_detail

/// P-table from the asymptotic recursion of the order-(r-1) ODE for the decaying solution and its derivatives.
inline PTable p_table_ode(long r, long order) {
  if (r < 3 || order < 0) throw std::invalid_argument("p_table requires r >= 3");
  const Rational rho = make_rational(r, r - 1);
  const Rational q0 = make_rational(-(r - 2), 2 * (r - 1));
  const Cyclotomic kappa(make_rational(-(r - 1), r));
  GenSeries u{kappa, rho, {}};
  u.add(q0, Cyclotomic(1));
  for (long n = 1; n <= order; ++n) {
    const Rational qn = q0 - Rational(n) * rho;
    const Rational target = q0 + 1 - Rational(n + 1) * rho;
    GenSeries single{kappa, rho, {}};
    single.add(qn, Cyclotomic(1));
    const Cyclotomic lead = asym_detail::hyper_operator(single, r).coeff(Rational(qn + 1 - rho));
    if (lead.is_zero()) throw ConsistencyError("degenerate asymptotic recursion for the hyper-Airy ODE");
    const Cyclotomic res = asym_detail::hyper_operator(u, r).coeff(target);
    u.add(qn, -res / lead);
  }
  PTable out{r, std::vector<std::vector<Rational>>(static_cast<std::size_t>(order + 1),
                                                    std::vector<Rational>(static_cast<std::size_t>(r)))};
  GenSeries d = u;
  for (long a = 0; a < r; ++a) {
    const Rational lead_exp = q0 + make_rational(a, r - 1);
    Rational rm(1);
    for (long m = 0; m <= order; ++m) {
      const Cyclotomic c = d.coeff(Rational(lead_exp - Rational(m) * rho));
      Rational v = require_rational(c, "P-table coefficient") * rm;
      if (a % 2) v = -v;
      out.values[static_cast<std::size_t>(m)][static_cast<std::size_t>(a)] = v;
      rm *= Rational(r - 1);
    }
    d = derivative(d);
  }
  return out;
}

/// P-table from the cyclic difference system with the level-(m+1) closure fixing P_m(r, 0).
inline PTable p_table_closure(long r, long order) {
  if (r < 3 || order < 0) throw std::invalid_argument("p_table requires r >= 3");
  PTable out{r, {std::vector<Rational>(static_cast<std::size_t>(r), Rational(1))}};
  for (long m = 1; m <= order; ++m) {
    const auto& prev = out.values.back();
    // offsets[a] = P_m(r,a) - P_m(r,0).
    std::vector<Rational> offsets(static_cast<std::size_t>(r), Rational(0));
    for (long a = 1; a < r; ++a)
      offsets[static_cast<std::size_t>(a)] =
          offsets[static_cast<std::size_t>(a - 1)] +
          (Rational(r * m) - make_rational(r, 2) - Rational(a)) * prev[static_cast<std::size_t>(a - 1)];
    // Closure: sum_{a=1}^{r-1} r(m + 1/2 - a/r) P_m(r, a-1) = 0.
    Rational weight_sum(0), known(0);
    for (long a = 1; a <= r - 1; ++a) {
      const Rational w = Rational(r * m) + make_rational(r, 2) - Rational(a);
      weight_sum += w;
      known += w * offsets[static_cast<std::size_t>(a - 1)];
    }
    if (weight_sum == 0) throw ConsistencyError("closure does not determine P_m(r,0)");
    const Rational p0 = -known / weight_sum;
    std::vector<Rational> row(static_cast<std::size_t>(r));
    for (long a = 0; a < r; ++a) row[static_cast<std::size_t>(a)] = p0 + offsets[static_cast<std::size_t>(a)];
    out.values.push_back(std::move(row));
  }
  return out;
}

/// Primary P-table route; cross-checked against the closure route and the table invariants.
inline PTable p_table(long r, long order) {
  PTable ode = p_table_ode(r, order);
  PTable closure = p_table_closure(r, order);
  if (ode.values != closure.values) throw ConsistencyError("P-table routes disagree for r=" + std::to_string(r));
  for (long m = 0; m <= order; ++m) {
    if (ode.at(m, 0) != ode.at(m, r - 1)) throw ConsistencyError("P-table periodicity P_m(r,0) = P_m(r,r-1) fails");
    for (long a = 1; a <= r - 2 && m >= 1; ++a)
      if (ode.at(m, a) - ode.at(m, a - 1) != (Rational(r * m) - make_rational(r, 2) - Rational(a)) * ode.at(m - 1, a - 1))
        throw ConsistencyError("P-table difference relation fails");
  }
  return ode;
}

/// Coefficients of A_r^{(a)}(u) = sum_m P_m(r,a) (u / (r(r-1)))^m.
inline std::vector<Rational> a_series(const PTable& table, long a) {
  std::vector<Rational> out;
  const Rational base = make_rational(1, table.r * (table.r - 1));
  Rational pw(1);
  for (long m = 0; m <= table.order(); ++m) {
    out.push_back(table.at(m, a) * pw);
    pw *= base;
  }
  return out;
}

enum class OdeKind { AiryLucas, HyperAiry };

/// numeric_prefactor * exact_prefactor * exp(rate * t^rate_exponent) * t^power * sum_m coeffs[m] t^{-m step}.
struct AsymptoticSolution {
  OdeKind kind = OdeKind::AiryLucas;
  long r = 0;
  long a = 0;
  long index = 0;
  double numeric_prefactor = 1.0;
  Cyclotomic exact_prefactor;
  Cyclotomic rate;
  Rational rate_exponent;
  Rational power;
  Rational step;
  std::vector<Cyclotomic> coeffs;

  bool is_zero() const { return exact_prefactor.is_zero(); }

  GenSeries as_gen_series() const {
    GenSeries out{rate, rate_exponent, {}};
    for (std::size_t m = 0; m < coeffs.size(); ++m)
      out.add(Rational(power - Rational(static_cast<long>(m)) * step), exact_prefactor * coeffs[m]);
    return out;
  }

  /// Partial sum with terms m = 0..last evaluated at real t > 0.
  std::complex<double> evaluate(double t, long last) const {
    std::complex<double> sum(0.0, 0.0);
    for (long m = 0; m <= last && m < static_cast<long>(coeffs.size()); ++m)
      sum += coeffs[static_cast<std::size_t>(m)].to_complex() * std::pow(t, -static_cast<double>(m) * step.get_d());
    return numeric_prefactor * exact_prefactor.to_complex() *
           std::exp(rate.to_complex() * std::pow(t, rate_exponent.get_d())) * std::pow(t, power.get_d()) * sum;
  }

  /// Single term m evaluated at real t > 0.
  std::complex<double> term(double t, long m) const {
    return numeric_prefactor * exact_prefactor.to_complex() *
           std::exp(rate.to_complex() * std::pow(t, rate_exponent.get_d())) * std::pow(t, power.get_d()) *
           coeffs.at(static_cast<std::size_t>(m)).to_complex() * std::pow(t, -static_cast<double>(m) * step.get_d());
  }
};

inline AsymptoticSolution airy_lucas_asymptotic(long r, long a, long j, long order) {
  if (r < 2 || a < 0 || a > r - 2 || j < 1 || j > r - 1) throw std::invalid_argument("airy_lucas_asymptotic index out of range");
  const double pi = std::acos(-1.0);
  AsymptoticSolution sol;
  sol.kind = OdeKind::AiryLucas;
  sol.r = r;
  sol.a = a;
  sol.index = j;
  sol.numeric_prefactor = 1.0 / std::sqrt(pi * static_cast<double>(r));
  sol.exact_prefactor = sine_value((a + 1) * j, r);
  sol.rate = Cyclotomic(make_rational(j % 2 ? -2 : 2, r));
  sol.rate_exponent = make_rational(r, 2);
  sol.power = make_rational(2 * a + 2 - r, 4);
  sol.step = make_rational(r, 2);
  const BSeries b = b_series(r, a, order);
  const Rational arg(j % 2 ? r : -r);
  Rational pw(1);
  for (long m = 0; m <= order; ++m) {
    sol.coeffs.emplace_back(b.b[static_cast<std::size_t>(m)] * pw);
    pw *= arg;
  }
  return sol;
}

inline AsymptoticSolution hyper_airy_asymptotic(long r, long k, long a, long order, const PTable* table = nullptr) {
  if (r < 3 || k < 0 || k > r - 2 || a < 0 || a > r - 1) throw std::invalid_argument("hyper_airy_asymptotic index out of range");
  std::optional<PTable> own;
  if (!table || table->r != r || table->order() < order) {
    own = p_table(r, order);
    table = &*own;
  }
  const double pi = std::acos(-1.0);
  const Cyclotomic theta_k = root_of_unity(r - 1, k);
  AsymptoticSolution sol;
  sol.kind = OdeKind::HyperAiry;
  sol.r = r;
  sol.a = a;
  sol.index = k;
  sol.numeric_prefactor = 1.0 / std::sqrt(2.0 * pi * static_cast<double>(r - 1));
  sol.exact_prefactor = (-theta_k).pow(a);
  sol.rate = Cyclotomic(make_rational(-(r - 1), r)) * theta_k;
  sol.rate_exponent = make_rational(r, r - 1);
  sol.power = make_rational(-(r - 2 * a - 2), 2 * (r - 1));
  sol.step = make_rational(r, r - 1);
  const Cyclotomic base = theta_k.inverse() * Cyclotomic(make_rational(1, r - 1));
  Cyclotomic pw(1);
  for (long m = 0; m <= order; ++m) {
    sol.coeffs.push_back(Cyclotomic(table->at(m, a)) * pw);
    pw *= base;
  }
  return sol;
}

namespace asym_detail {

// Largest exponent shift produced by the operator on a single generic term.
inline Rational generic_shift(const std::function<GenSeries(const GenSeries&)>& op, const Cyclotomic& kappa,
                              const Rational& rho, const Rational& q) {
  const Rational generic = q + make_rational(1, 7);
  GenSeries single{kappa, rho, {}};
  single.add(generic, Cyclotomic(1));
  auto top = top_exponent(op(single));
  if (!top) throw ConsistencyError("operator annihilates a generic term");
  return *top - generic;
}

// Residual exponents strictly above the threshold are unaffected by the omitted terms.
inline Report check_window(const GenSeries& residual, const Rational& threshold, const Rational& top, const Rational& step,
                           const std::string& what) {
  Report rep;
  for (const auto& [q, c] : residual.terms)
    if (q > threshold && !c.is_zero())
      rep.record(false, what + ": nonzero residual at exponent " + q.get_str());
  long orders = 0;
  for (Rational q = top; q > threshold; q -= step) ++orders;
  rep.record(orders > 0, what + ": no complete residual orders to check");
  rep.checks += orders;
  return rep;
}

}  // namespace asym_detail

/// Substitutes the truncated expansion into its ODE and checks every complete residual order vanishes.
/// Hyper-Airy derivatives (a >= 1) are checked by compatibility with the t-derivative of the a-1 expansion.
inline Report ode_residual_check(const AsymptoticSolution& sol) {
  using namespace asym_detail;
  Report rep;
  if (sol.is_zero()) {
    rep.record(true, "zero solution");
    return rep;
  }
  const GenSeries u = sol.as_gen_series();
  const long last = static_cast<long>(sol.coeffs.size()) - 1;
  const Rational first_missing = sol.power - Rational(last + 1) * sol.step;
  const std::string tag = std::string(sol.kind == OdeKind::AiryLucas ? "Airy-Lucas" : "hyper-Airy") +
                          " r=" + std::to_string(sol.r) + " a=" + std::to_string(sol.a) +
                          " index=" + std::to_string(sol.index);
  if (sol.kind == OdeKind::AiryLucas) {
    auto op = [&](const GenSeries& s) { return lucas_operator(s, sol.r, sol.a); };
    const Rational shift = generic_shift(op, sol.rate, sol.rate_exponent, sol.power);
    rep.merge(check_window(op(u), first_missing + shift, sol.power + shift, sol.step, tag));
    return rep;
  }
  if (sol.a == 0) {
    auto op = [&](const GenSeries& s) { return hyper_operator(s, sol.r); };
    const Rational shift = generic_shift(op, sol.rate, sol.rate_exponent, sol.power);
    rep.merge(check_window(op(u), first_missing + shift, sol.power + shift, sol.step, tag));
    return rep;
  }
  const AsymptoticSolution lower = hyper_airy_asymptotic(sol.r, sol.index, sol.a - 1, last);
  const GenSeries du = derivative(lower.as_gen_series());
  const Rational lower_missing = lower.power - Rational(last + 1) * lower.step;
  const Rational shift = sol.rate_exponent - 1;
  const Rational threshold = std::max(Rational(lower_missing + shift), first_missing);
  rep.merge(check_window(du - u, threshold, sol.power, sol.step, tag + " derivative compatibility"));
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Steepest-descent numerics.

using Complex = std::complex<double>;
using ComplexPolynomial = std::vector<Complex>;

inline Complex poly_eval(const ComplexPolynomial& p, Complex z) {
  Complex out(0.0, 0.0);
  for (std::size_t i = p.size(); i-- > 0;) out = out * z + p[i];
  return out;
}

inline ComplexPolynomial poly_derivative(const ComplexPolynomial& p) {
  ComplexPolynomial out;
  for (std::size_t i = 1; i < p.size(); ++i) out.push_back(p[i] * static_cast<double>(i));
  return out;
}

/// All complex roots by Durand-Kerner iteration.
inline std::vector<Complex> poly_roots(ComplexPolynomial p) {
  while (!p.empty() && std::abs(p.back()) == 0.0) p.pop_back();
  const std::size_t n = p.size() - 1;
  if (p.size() < 2) return {};
  for (auto& c : p) c /= p.back();
  std::vector<Complex> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(Complex(0.4, 0.9), static_cast<double>(i));
  for (int iter = 0; iter < 500; ++iter) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex den(1.0, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) den *= z[i] - z[j];
      const Complex step = poly_eval(p, z[i]) / den;
      z[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-15) break;
  }
  return z;
}

class StokesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ThimbleOptions {
  double step = 0.02;           // spacing in the Gaussian parameter sigma
  double sigma_max = 7.0;       // e^{-sigma^2} cut-off
  double phase_delta = 0.1;     // perturbation of arg s used to build the path
  double escape_radius = 1e6;
  Complex orientation{0.0, 1.0};  // preferred tangent direction at the critical point
};

/// Steepest-descent path through a critical point, sampled uniformly in sigma with
/// s_flow (h(v) - h(crit)) = -sigma^2 and s_flow = s e^{i delta}.
struct ThimblePath {
  Complex crit;
  Complex s;
  Complex s_flow;
  double step = 0.0;
  std::vector<double> sigma;
  std::vector<Complex> points;
  std::vector<Complex> tangents;  // dv/dsigma
};

inline ThimblePath thimble_flow(const ComplexPolynomial& h, Complex s, Complex crit, const ThimbleOptions& opt = {}) {
  const ComplexPolynomial dh = poly_derivative(h), d2h = poly_derivative(dh);
  const double scale = 1.0 + std::abs(crit);
  if (std::abs(poly_eval(dh, crit)) > 1e-9 * scale) throw std::invalid_argument("thimble_flow: crit is not a critical point");
  const Complex h2 = poly_eval(d2h, crit);
  if (std::abs(h2) < 1e-12) throw std::invalid_argument("thimble_flow: degenerate critical point");
  const Complex s_flow = s * std::polar(1.0, opt.phase_delta);
  const Complex hc = poly_eval(h, crit);
  // A second critical point on the same descending level set signals a Stokes line.
  for (const Complex& other : poly_roots(dh)) {
    if (std::abs(other - crit) < 1e-6 * scale) continue;
    const Complex diff = s_flow * (poly_eval(h, other) - hc);
    if (std::abs(diff.imag()) < 1e-9 * (1.0 + std::abs(diff)) && diff.real() < 0.0)
      throw StokesError("descent path from the critical point runs into another critical point (Stokes line); perturb the phase of s");
  }
  Complex a1 = std::sqrt(-2.0 / (s_flow * h2));
  if ((a1 * std::conj(opt.orientation)).real() < 0.0) a1 = -a1;

  const long n = static_cast<long>(std::ceil(opt.sigma_max / opt.step));
  ThimblePath path;
  path.crit = crit;
  path.s = s;
  path.s_flow = s_flow;
  path.step = opt.step;
  std::vector<Complex> plus{crit}, minus{crit};
  for (int side = 0; side < 2; ++side) {
    auto& pts = side == 0 ? plus : minus;
    const double dir = side == 0 ? 1.0 : -1.0;
    Complex v = crit, vel = dir * a1;
    for (long i = 1; i <= n; ++i) {
      const double sig = dir * opt.step * static_cast<double>(i);
      Complex guess = v + vel * (dir * opt.step);
      if (i == 1) guess = crit + a1 * sig;
      for (int it = 0; it < 60; ++it) {
        const Complex f = s_flow * (poly_eval(h, guess) - hc) + sig * sig;
        const Complex fp = s_flow * poly_eval(dh, guess);
        if (std::abs(fp) < 1e-14) throw StokesError("descent path reached a critical point (Stokes line); perturb the phase of s");
        const Complex upd = f / fp;
        guess -= upd;
        if (std::abs(upd) < 1e-15 * (1.0 + std::abs(guess))) break;
      }
      const Complex resid = s_flow * (poly_eval(h, guess) - hc) + sig * sig;
      if (std::abs(resid) > 1e-8 * (1.0 + sig * sig)) throw StokesError("continuation of the descent path failed to converge");
      const Complex new_vel = -2.0 * sig / (s_flow * poly_eval(dh, guess));
      if (std::abs(new_vel) > 1e3 * (std::abs(a1) + std::abs(guess - crit)))
        throw StokesError("descent path approaches another critical point (Stokes line); perturb the phase of s");
      if (std::abs(guess) > opt.escape_radius) throw StokesError("descent path escaped the region budget");
      v = guess;
      vel = new_vel;
      pts.push_back(v);
    }
  }
  for (long i = n; i >= 1; --i) {
    const double sig = -opt.step * static_cast<double>(i);
    path.sigma.push_back(sig);
    path.points.push_back(minus[static_cast<std::size_t>(i)]);
  }
  for (long i = 0; i <= n; ++i) {
    path.sigma.push_back(opt.step * static_cast<double>(i));
    path.points.push_back(plus[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const double sig = path.sigma[i];
    path.tangents.push_back(sig == 0.0 ? a1 : -2.0 * sig / (s_flow * poly_eval(dh, path.points[i])));
  }
  return path;
}

/// Checks Im(s_flow h) constant and Re(s_flow h) non-increasing away from the critical point.
inline Report check_descent_invariants(const ComplexPolynomial& h, const ThimblePath& path, double tol = 1e-8) {
  Report rep;
  const Complex hc = path.s_flow * poly_eval(h, path.crit);
  const std::size_t mid = path.points.size() / 2;
  double prev_plus = hc.real(), prev_minus = hc.real();
  for (std::size_t i = mid; i < path.points.size(); ++i) {
    const Complex val = path.s_flow * poly_eval(h, path.points[i]);
    rep.record(std::abs(val.imag() - hc.imag()) <= tol * (1.0 + std::abs(val)), "Im(s h) constant along path");
    rep.record(val.real() <= prev_plus + tol, "Re(s h) non-increasing along path");
    prev_plus = val.real();
  }
  for (std::size_t i = mid + 1; i-- > 0;) {
    const Complex val = path.s_flow * poly_eval(h, path.points[i]);
    rep.record(std::abs(val.imag() - hc.imag()) <= tol * (1.0 + std::abs(val)), "Im(s h) constant along path");
    rep.record(val.real() <= prev_minus + tol, "Re(s h) non-increasing along path");
    prev_minus = val.real();
  }
  return rep;
}

struct QuadratureResult {
  Complex value;
  double est_error = 0.0;
};

/// Integral of g(v) e^{s h(v)} dv along the path, trapezoid rule in sigma with a step-halving error estimate.
/// The path is rebuilt with smaller steps until the estimate meets the requested precision.
inline QuadratureResult thimble_integrate(const std::function<Complex(Complex)>& g, const ComplexPolynomial& h, Complex s,
                                          ThimblePath path, double precision = 1e-12, const ThimbleOptions& opt = {},
                                          int max_refinements = 6) {
  const Complex hc = poly_eval(h, path.crit);
  for (int attempt = 0; attempt <= max_refinements; ++attempt) {
    Complex fine(0.0, 0.0), coarse(0.0, 0.0);
    const std::size_t mid = path.points.size() / 2;
    for (std::size_t i = 0; i < path.points.size(); ++i) {
      const Complex v = path.points[i];
      const Complex f = g(v) * std::exp(s * (poly_eval(h, v) - hc)) * path.tangents[i];
      const double end_weight = (i == 0 || i + 1 == path.points.size()) ? 0.5 : 1.0;
      fine += end_weight * f;
      const long offset = static_cast<long>(i) - static_cast<long>(mid);
      if (offset % 2 == 0) coarse += end_weight * f;
    }
    fine *= path.step;
    coarse *= 2.0 * path.step;
    const Complex pref = std::exp(s * hc);
    QuadratureResult res{pref * fine, std::abs(pref) * std::abs(fine - coarse)};
    if (res.est_error <= precision * std::max(1e-300, std::abs(res.value)) || attempt == max_refinements) {
      if (res.est_error > precision * std::abs(res.value))
        throw std::runtime_error("thimble_integrate: precision not reached within the refinement budget");
      return res;
    }
    ThimbleOptions finer = opt;
    finer.step = path.step / 2.0;
    finer.phase_delta = std::arg(path.s_flow / s);
    path = thimble_flow(h, s, path.crit, finer);
  }
  throw std::runtime_error("thimble_integrate: unreachable");
}

/// Outcome of comparing a quadrature value with a truncated asymptotic series.
struct AsymptoticComparison {
  Complex numeric;
  double quadrature_error = 0.0;
  Complex truncated;
  double first_omitted = 0.0;
  double deviation = 0.0;
  bool sign_flipped = false;
  bool agrees = false;
};

inline AsymptoticComparison compare_with_asymptotics(Complex numeric, double quad_err, const AsymptoticSolution& sol, double t,
                                                     long last) {
  AsymptoticComparison out;
  out.numeric = numeric;
  out.quadrature_error = quad_err;
  out.truncated = sol.evaluate(t, last);
  out.first_omitted = std::abs(sol.term(t, last + 1));
  const double direct = std::abs(numeric - out.truncated);
  const double flipped = std::abs(numeric + out.truncated);
  out.sign_flipped = flipped < direct;
  out.deviation = std::min(direct, flipped);
  out.agrees = out.deviation <= out.first_omitted;
  return out;
}

/// Classical Airy integral Ai(t) = (sqrt(t) / 2 pi i) int e^{s (v^3/3 - v)} dv with s = t^{3/2}, through v = 1.
inline QuadratureResult airy_quadrature(double t, double precision = 1e-12, const ThimbleOptions& opt = {}) {
  const ComplexPolynomial h{0.0, -1.0, 0.0, 1.0 / 3.0};
  const Complex s(std::pow(t, 1.5), 0.0);
  ThimblePath path = thimble_flow(h, s, Complex(1.0, 0.0), opt);
  QuadratureResult q = thimble_integrate([](Complex) { return Complex(1.0, 0.0); }, h, s, path, precision, opt);
  const Complex factor = std::sqrt(t) / Complex(0.0, 2.0 * std::acos(-1.0));
  return {factor * q.value, std::abs(factor) * q.est_error};
}

/// Hyper-Airy integral (t^{1/(r-1)} / 2 pi i) int e^{s (v^r/r - v)} dv with s = t^{r/(r-1)} through v = theta^k.
inline QuadratureResult hyper_airy_quadrature(long r, long k, double t, double precision = 1e-12,
                                              const ThimbleOptions& opt = {}) {
  ComplexPolynomial h(static_cast<std::size_t>(r + 1), Complex(0.0, 0.0));
  h[1] = -1.0;
  h[static_cast<std::size_t>(r)] = 1.0 / static_cast<double>(r);
  const double e = 1.0 / static_cast<double>(r - 1);
  const Complex s(std::pow(t, static_cast<double>(r) * e), 0.0);
  const Complex crit = std::polar(1.0, 2.0 * std::acos(-1.0) * static_cast<double>(k) * e);
  ThimbleOptions o = opt;
  if (k != 0) o.orientation = crit * Complex(0.0, 1.0);
  ThimblePath path = thimble_flow(h, s, crit, o);
  QuadratureResult q = thimble_integrate([](Complex) { return Complex(1.0, 0.0); }, h, s, path, precision, o);
  const Complex factor = std::pow(t, e) / Complex(0.0, 2.0 * std::acos(-1.0));
  return {factor * q.value, std::abs(factor) * q.est_error};
}

}  // namespace spinrec
