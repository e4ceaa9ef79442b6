#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spinrec {

using Integer = mpz_class;
using Rational = mpq_class;

/// Raised when an exact computation detects an internal inconsistency.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }
inline bool is_zero(const Integer& z) { return sgn(z) == 0; }

inline Rational make_rational(long p, long q = 1) {
  if (q == 0) throw std::invalid_argument("zero denominator");
  Rational out(p, q);
  out.canonicalize();
  return out;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

/// Parses "p/q", "p" or a decimal-free signed integer.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  Rational out;
  if (out.set_str(text, 10) != 0) throw std::invalid_argument("bad rational: " + text);
  if (sgn(out.get_den()) == 0) throw std::invalid_argument("zero denominator: " + text);
  out.canonicalize();
  return out;
}

inline Rational rational_pow(const Rational& base, long e) {
  if (e < 0) {
    if (is_zero(base)) throw std::domain_error("negative power of zero");
    return rational_pow(Rational(1) / base, -e);
  }
  Rational out(1), b(base);
  unsigned long k = static_cast<unsigned long>(e);
  while (k) {
    if (k & 1UL) out *= b;
    b *= b;
    k >>= 1;
  }
  return out;
}

/// (2k-1)!! with the conventions (-1)!! = 1 and (-3)!! = -1.
inline Integer double_factorial_odd(long k) {
  if (k == -1) return Integer(-1);
  if (k < -1) throw std::domain_error("double factorial below (-3)!!");
  Integer out(1);
  for (long j = 2 * k - 1; j > 1; j -= 2) out *= j;
  return out;
}

inline Integer factorial(long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n));
  return out;
}

inline Integer binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return Integer(0);
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

inline long lcm_long(long a, long b) { return std::lcm(a, b); }

namespace detail {

using RVec = std::vector<Rational>;

inline void trim(RVec& p) {
  while (!p.empty() && is_zero(p.back())) p.pop_back();
}

inline std::vector<Integer> int_poly_mul(const std::vector<Integer>& a, const std::vector<Integer>& b) {
  std::vector<Integer> out(a.size() + b.size() - 1, Integer(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

// Exact division of integer polynomials by a monic divisor.
inline std::vector<Integer> int_poly_divexact(std::vector<Integer> num, const std::vector<Integer>& den) {
  const std::size_t dn = den.size() - 1;
  std::vector<Integer> q(num.size() - dn, Integer(0));
  for (std::size_t i = num.size(); i-- > dn;) {
    Integer c = num[i];
    q[i - dn] = c;
    for (std::size_t j = 0; j <= dn; ++j) num[i - dn + j] -= c * den[j];
  }
  for (const auto& c : num)
    if (sgn(c) != 0) throw ConsistencyError("cyclotomic polynomial division is not exact");
  return q;
}

// Polynomial remainder and extended gcd over Q; used for field inversion.
inline RVec rpoly_sub(const RVec& a, const RVec& b) {
  RVec out(std::max(a.size(), b.size()), Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  trim(out);
  return out;
}

inline RVec rpoly_mul(const RVec& a, const RVec& b) {
  if (a.empty() || b.empty()) return {};
  RVec out(a.size() + b.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (is_zero(a[i])) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  trim(out);
  return out;
}

inline void rpoly_divmod(const RVec& a, const RVec& b, RVec& q, RVec& r) {
  r = a;
  trim(r);
  q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, Rational(0));
  const Rational lead_inv = Rational(1) / b.back();
  while (!r.empty() && r.size() >= b.size()) {
    const std::size_t shift = r.size() - b.size();
    Rational c = r.back() * lead_inv;
    q[shift] = c;
    for (std::size_t j = 0; j < b.size(); ++j) r[shift + j] -= c * b[j];
    trim(r);
  }
  trim(q);
}

}  // namespace detail

/// Immutable description of Q(zeta_m) = Q[x]/(Phi_m).
class CyclotomicField {
 public:
  static std::shared_ptr<const CyclotomicField> of(long m) {
    if (m < 1) throw std::invalid_argument("cyclotomic conductor must be positive");
    static std::mutex mu;
    static std::map<long, std::shared_ptr<const CyclotomicField>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    auto f = std::shared_ptr<const CyclotomicField>(new CyclotomicField(m));
    cache.emplace(m, f);
    return f;
  }

  long conductor() const { return m_; }
  std::size_t degree() const { return phi_.size() - 1; }
  /// Coefficients of Phi_m, lowest degree first; monic.
  const std::vector<Integer>& modulus() const { return phi_; }

  /// Reduces a coefficient vector of arbitrary length modulo Phi_m in place.
  void reduce(detail::RVec& c) const {
    const std::size_t d = degree();
    for (std::size_t i = c.size(); i-- > d;) {
      if (is_zero(c[i])) continue;
      Rational v = c[i];
      for (std::size_t j = 0; j <= d; ++j) c[i - d + j] -= v * phi_[j];
    }
    c.resize(d, Rational(0));
  }

  static std::vector<Integer> cyclotomic_polynomial(long m) {
    std::vector<Integer> num(static_cast<std::size_t>(m) + 1, Integer(0));
    num[0] = -1;
    num[static_cast<std::size_t>(m)] = 1;
    for (long d = 1; d < m; ++d)
      if (m % d == 0) num = detail::int_poly_divexact(num, of(d)->modulus());
    return num;
  }

 private:
  explicit CyclotomicField(long m) : m_(m) {
    if (m == 1) {
      phi_ = {Integer(-1), Integer(1)};
    } else {
      std::vector<Integer> num(static_cast<std::size_t>(m) + 1, Integer(0));
      num[0] = -1;
      num[static_cast<std::size_t>(m)] = 1;
      for (long d = 1; d < m; ++d) {
        if (m % d != 0) continue;
        // Recursion through the cache is safe: callers hold no lock here.
        num = detail::int_poly_divexact(num, divisor_modulus(d));
      }
      phi_ = std::move(num);
    }
  }

  static std::vector<Integer> divisor_modulus(long d) {
    if (d == 1) return {Integer(-1), Integer(1)};
    std::vector<Integer> num(static_cast<std::size_t>(d) + 1, Integer(0));
    num[0] = -1;
    num[static_cast<std::size_t>(d)] = 1;
    for (long e = 1; e < d; ++e)
      if (d % e == 0) num = detail::int_poly_divexact(num, divisor_modulus(e));
    return num;
  }

  long m_;
  std::vector<Integer> phi_;
};

/// Element of a cyclotomic field Q(zeta_m) in the power basis 1, zeta, ..., zeta^{phi(m)-1}.
/// Binary operations on elements of different conductors lift both operands to the lcm.
class Cyclotomic {
 public:
  Cyclotomic() : f_(CyclotomicField::of(1)), c_(1, Rational(0)) {}
  Cyclotomic(const Rational& q) : f_(CyclotomicField::of(1)), c_(1, q) {}  // NOLINT
  Cyclotomic(long v) : Cyclotomic(Rational(v)) {}                          // NOLINT
  Cyclotomic(int v) : Cyclotomic(Rational(v)) {}                           // NOLINT

  /// Builds the class of sum coeffs[k] zeta_m^k; coeffs may be longer than phi(m).
  Cyclotomic(long m, std::vector<Rational> coeffs) : f_(CyclotomicField::of(m)), c_(std::move(coeffs)) {
    f_->reduce(c_);
  }

  long conductor() const { return f_->conductor(); }
  const std::vector<Rational>& coeffs() const { return c_; }
  const std::shared_ptr<const CyclotomicField>& field() const { return f_; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](const Rational& q) { return sgn(q) == 0; });
  }

  bool is_rational() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (sgn(c_[i]) != 0) return false;
    return true;
  }

  std::optional<Rational> as_rational() const {
    if (!is_rational()) return std::nullopt;
    return c_.empty() ? Rational(0) : c_[0];
  }

  /// Image under Q(zeta_m) -> Q(zeta_{m2}), zeta_m -> zeta_{m2}^{m2/m}.
  Cyclotomic embed(long m2) const {
    const long m = conductor();
    if (m2 == m) return *this;
    if (m2 % m != 0) throw std::invalid_argument("embedding requires m | m'");
    const long step = m2 / m;
    std::vector<Rational> out(static_cast<std::size_t>(step) * c_.size() + 1, Rational(0));
    if (m == 1) {
      out[0] = c_[0];
    } else {
      for (std::size_t k = 0; k < c_.size(); ++k) out[k * static_cast<std::size_t>(step)] = c_[k];
    }
    return Cyclotomic(m2, std::move(out));
  }

  /// Complex conjugation zeta -> zeta^{-1}.
  Cyclotomic conj() const {
    const long m = conductor();
    if (m <= 2) return *this;
    std::vector<Rational> out(static_cast<std::size_t>(m), Rational(0));
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (sgn(c_[k]) == 0) continue;
      out[(static_cast<std::size_t>(m) - k) % static_cast<std::size_t>(m)] += c_[k];
    }
    return Cyclotomic(m, std::move(out));
  }

  std::complex<double> to_complex() const {
    const double m = static_cast<double>(conductor());
    std::complex<double> out(0.0, 0.0);
    const double pi = std::acos(-1.0);
    for (std::size_t k = 0; k < c_.size(); ++k) {
      if (sgn(c_[k]) == 0) continue;
      const double ang = 2.0 * pi * static_cast<double>(k) / m;
      // zeta_1 = 1 and zeta_2 = -1 are consistent with the generic formula.
      out += c_[k].get_d() * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return out;
  }

  Cyclotomic inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero cyclotomic element");
    if (c_.size() == 1) return Cyclotomic(conductor(), {Rational(1) / c_[0]});
    // Extended Euclid: find s with s*a = 1 mod Phi.
    detail::RVec a = c_;
    detail::trim(a);
    detail::RVec b;
    for (const auto& z : f_->modulus()) b.emplace_back(z);
    detail::RVec s0{Rational(1)}, s1{};
    detail::RVec r0 = a, r1 = b;
    while (!r1.empty()) {
      detail::RVec q, r;
      detail::rpoly_divmod(r0, r1, q, r);
      detail::RVec s2 = detail::rpoly_sub(s0, detail::rpoly_mul(q, s1));
      r0 = std::move(r1);
      r1 = std::move(r);
      s0 = std::move(s1);
      s1 = std::move(s2);
    }
    if (r0.size() != 1) throw ConsistencyError("cyclotomic modulus is not irreducible");
    const Rational inv = Rational(1) / r0[0];
    for (auto& v : s0) v *= inv;
    return Cyclotomic(conductor(), std::move(s0));
  }

  Cyclotomic pow(long e) const {
    if (e < 0) return inverse().pow(-e);
    Cyclotomic out(Rational(1)), b(*this);
    while (e) {
      if (e & 1) out *= b;
      b *= b;
      e >>= 1;
    }
    return out;
  }

  Cyclotomic operator-() const {
    Cyclotomic out(*this);
    for (auto& v : out.c_) v = -v;
    return out;
  }

  Cyclotomic& operator+=(const Cyclotomic& o) {
    if (o.conductor() == conductor()) {
      for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
      return *this;
    }
    if (o.conductor() == 1) {
      c_[0] += o.c_[0];
      return *this;
    }
    const long m = lcm_long(conductor(), o.conductor());
    *this = embed(m);
    Cyclotomic oo = o.embed(m);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += oo.c_[i];
    return *this;
  }

  Cyclotomic& operator-=(const Cyclotomic& o) { return *this += -o; }

  Cyclotomic& operator*=(const Cyclotomic& o) {
    if (o.conductor() == 1) {
      for (auto& v : c_) v *= o.c_[0];
      return *this;
    }
    if (conductor() == 1) {
      Rational s = c_[0];
      *this = o;
      for (auto& v : c_) v *= s;
      return *this;
    }
    if (o.conductor() != conductor()) {
      const long m = lcm_long(conductor(), o.conductor());
      Cyclotomic a = embed(m), b = o.embed(m);
      a *= b;
      *this = std::move(a);
      return *this;
    }
    const std::size_t d = c_.size();
    std::vector<Rational> prod(2 * d - 1, Rational(0));
    for (std::size_t i = 0; i < d; ++i) {
      if (sgn(c_[i]) == 0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        if (sgn(o.c_[j]) == 0) continue;
        prod[i + j] += c_[i] * o.c_[j];
      }
    }
    f_->reduce(prod);
    c_ = std::move(prod);
    return *this;
  }

  Cyclotomic& operator/=(const Cyclotomic& o) {
    if (o.conductor() == 1) {
      if (sgn(o.c_[0]) == 0) throw std::domain_error("division by zero");
      for (auto& v : c_) v /= o.c_[0];
      return *this;
    }
    return *this *= o.inverse();
  }

  friend Cyclotomic operator+(Cyclotomic a, const Cyclotomic& b) { return a += b; }
  friend Cyclotomic operator-(Cyclotomic a, const Cyclotomic& b) { return a -= b; }
  friend Cyclotomic operator*(Cyclotomic a, const Cyclotomic& b) { return a *= b; }
  friend Cyclotomic operator/(Cyclotomic a, const Cyclotomic& b) { return a /= b; }

  friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) { return (a - b).is_zero(); }
  friend bool operator!=(const Cyclotomic& a, const Cyclotomic& b) { return !(a == b); }

 private:
  std::shared_ptr<const CyclotomicField> f_;
  std::vector<Rational> c_;
};

inline bool is_zero(const Cyclotomic& x) { return x.is_zero(); }

/// zeta_m^k.
inline Cyclotomic root_of_unity(long m, long k) {
  if (m < 1) throw std::invalid_argument("root_of_unity requires m >= 1");
  long e = ((k % m) + m) % m;
  std::vector<Rational> c(static_cast<std::size_t>(e) + 1, Rational(0));
  c[static_cast<std::size_t>(e)] = 1;
  return Cyclotomic(m, std::move(c));
}

inline Cyclotomic imaginary_unit() { return root_of_unity(4, 1); }

/// sin(k pi / r) inside Q(zeta_lcm(4, 2r)).
inline Cyclotomic sine_value(long k, long r) {
  if (r < 1) throw std::invalid_argument("sine_value requires r >= 1");
  Cyclotomic num = root_of_unity(2 * r, k) - root_of_unity(2 * r, -k);
  return num / (Cyclotomic(Rational(2)) * imaginary_unit());
}

/// cos(k pi / r) inside Q(zeta_2r).
inline Cyclotomic cosine_value(long k, long r) {
  if (r < 1) throw std::invalid_argument("cosine_value requires r >= 1");
  return (root_of_unity(2 * r, k) + root_of_unity(2 * r, -k)) * Cyclotomic(Rational(1, 2));
}

namespace detail {

inline long legendre_symbol(long a, long p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  long result = 1, e = (p - 1) / 2, base = a;
  long acc = 1;
  while (e) {
    if (e & 1) acc = (acc * base) % p;
    base = (base * base) % p;
    e >>= 1;
  }
  result = (acc == 1) ? 1 : -1;
  return result;
}

// Positive square root of a prime p as a cyclotomic element.
inline Cyclotomic sqrt_prime(long p) {
  if (p == 2) return root_of_unity(8, 1) + root_of_unity(8, -1);
  Cyclotomic gauss;
  for (long a = 1; a < p; ++a) gauss += Cyclotomic(Rational(legendre_symbol(a, p))) * root_of_unity(p, a);
  if (p % 4 == 1) return gauss;
  // For p = 3 mod 4 the Gauss sum equals i sqrt(p).
  return -(imaginary_unit() * gauss);
}

}  // namespace detail

/// Principal square root of an integer: positive real for n > 0, i sqrt(|n|) for n < 0.
inline Cyclotomic sqrt_integer(const Integer& n) {
  if (sgn(n) == 0) return Cyclotomic();
  Integer a = abs(n);
  Integer square_part(1);
  Cyclotomic radical(Rational(1));
  Integer p(2);
  while (p * p <= a) {
    long e = 0;
    while (mpz_divisible_p(a.get_mpz_t(), p.get_mpz_t())) {
      a /= p;
      ++e;
    }
    for (long j = 0; j < e / 2; ++j) square_part *= p;
    if (e % 2 == 1) radical *= detail::sqrt_prime(p.get_si());
    p += 1;
  }
  if (a > 1) {
    if (!a.fits_slong_p()) throw std::overflow_error("radicand too large");
    radical *= detail::sqrt_prime(a.get_si());
  }
  Cyclotomic out = radical * Cyclotomic(Rational(square_part));
  if (sgn(n) < 0) out *= imaginary_unit();
  return out;
}

/// Principal square root of a rational number.
inline Cyclotomic sqrt_rational(const Rational& q) {
  Integer num = q.get_num(), den = q.get_den();
  return sqrt_integer(num * den) / Cyclotomic(Rational(den));
}

/// Returns the rational value or throws ConsistencyError naming the context.
inline Rational require_rational(const Cyclotomic& x, const std::string& context) {
  auto q = x.as_rational();
  if (!q) throw ConsistencyError("non-rational value where rationality was asserted: " + context);
  return *q;
}

inline std::string to_string(const Cyclotomic& x) {
  if (auto q = x.as_rational()) return q->get_str();
  std::string s = "{m=" + std::to_string(x.conductor()) + ":";
  for (std::size_t i = 0; i < x.coeffs().size(); ++i) s += (i ? "," : "") + x.coeffs()[i].get_str();
  return s + "}";
}

}  // namespace spinrec
