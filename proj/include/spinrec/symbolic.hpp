#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "spinrec/scalar.hpp"

namespace spinrec {

template <class T>
class Polynomial;
template <class T>
bool is_zero(const Polynomial<T>& p);
template <class T>
std::string to_string(const Polynomial<T>& p);

/// Dense univariate polynomial; coefficient i multiplies x^i.
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const T& c) {  // NOLINT
    if (!spinrec::is_zero(c)) c_.push_back(c);
  }
  template <class I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
  Polynomial(I c) : Polynomial(T(static_cast<long>(c))) {}  // NOLINT
  explicit Polynomial(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial monomial(const T& c, std::size_t degree) {
    std::vector<T> v(degree + 1, T(0));
    v[degree] = c;
    return Polynomial(std::move(v));
  }
  static Polynomial x() { return monomial(T(1), 1); }

  bool is_zero() const { return c_.empty(); }
  /// Degree; -1 for the zero polynomial.
  long degree() const { return static_cast<long>(c_.size()) - 1; }
  const std::vector<T>& coeffs() const { return c_; }
  T coeff(long i) const { return (i >= 0 && i < static_cast<long>(c_.size())) ? c_[static_cast<std::size_t>(i)] : T(0); }
  const T& leading() const {
    if (c_.empty()) throw std::domain_error("leading coefficient of zero polynomial");
    return c_.back();
  }

  template <class S>
  S evaluate(const S& at) const {
    S out(0);
    for (std::size_t i = c_.size(); i-- > 0;) out = out * at + S(c_[i]);
    return out;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<T> out(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) out[i - 1] = c_[i] * T(static_cast<long>(i));
    return Polynomial(std::move(out));
  }

  /// p(x + a).
  Polynomial shift(const T& a) const {
    Polynomial out;
    const Polynomial lin(std::vector<T>{a, T(1)});
    for (std::size_t i = c_.size(); i-- > 0;) out = out * lin + Polynomial(c_[i]);
    return out;
  }

  /// p(q(x)).
  Polynomial compose(const Polynomial& q) const {
    Polynomial out;
    for (std::size_t i = c_.size(); i-- > 0;) out = out * q + Polynomial(c_[i]);
    return out;
  }

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<decltype(f(std::declval<const T&>()))>;
    std::vector<U> out;
    out.reserve(c_.size());
    for (const auto& v : c_) out.push_back(f(v));
    return Polynomial<U>(std::move(out));
  }

  Polynomial operator-() const {
    Polynomial out(*this);
    for (auto& v : out.c_) v = -v;
    return out;
  }
  Polynomial& operator+=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
    for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<T> out(a.c_.size() + b.c_.size() - 1, T(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      if (spinrec::is_zero(a.c_[i])) continue;
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return Polynomial(std::move(out));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return (a - b).is_zero(); }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  Polynomial pow(unsigned long e) const {
    Polynomial out(T(1)), b(*this);
    while (e) {
      if (e & 1UL) out *= b;
      b *= b;
      e >>= 1;
    }
    return out;
  }

  /// Quotient and remainder; requires an invertible leading coefficient in T.
  friend std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw std::domain_error("polynomial division by zero");
    std::vector<T> r = a.c_;
    if (r.size() < b.c_.size()) return {Polynomial(), a};
    std::vector<T> q(r.size() - b.c_.size() + 1, T(0));
    const T inv = T(1) / b.c_.back();
    const long bn = static_cast<long>(b.c_.size());
    for (long i = static_cast<long>(r.size()) - 1; i >= bn - 1; --i) {
      if (spinrec::is_zero(r[static_cast<std::size_t>(i)])) continue;
      const std::size_t shift = static_cast<std::size_t>(i + 1 - bn);
      T f = r[static_cast<std::size_t>(i)] * inv;
      q[shift] = f;
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[shift + j] -= f * b.c_[j];
    }
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
  }

  Polynomial monic() const {
    if (is_zero()) return *this;
    const T inv = T(1) / c_.back();
    Polynomial out(*this);
    for (auto& v : out.c_) v *= inv;
    return out;
  }

  friend Polynomial gcd(Polynomial a, Polynomial b) {
    while (!b.is_zero()) {
      auto r = divmod(a, b).second;
      a = std::move(b);
      b = std::move(r);
    }
    return a.monic();
  }

  std::string to_string(const std::string& var = "x") const {
    if (c_.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (spinrec::is_zero(c_[i])) continue;
      if (!s.empty()) s += " + ";
      s += "(" + spinrec::to_string(c_[i]) + ")";
      if (i > 0) s += "*" + var + (i > 1 ? "^" + std::to_string(i) : "");
    }
    return s;
  }

 private:
  void trim() {
    while (!c_.empty() && spinrec::is_zero(c_.back())) c_.pop_back();
  }
  std::vector<T> c_;
};

template <class T>
bool is_zero(const Polynomial<T>& p) {
  return p.is_zero();
}
template <class T>
std::string to_string(const Polynomial<T>& p) {
  return p.to_string();
}

/// Quotient of polynomials over a field, reduced with a monic denominator.
template <class T>
class RationalFunction {
 public:
  RationalFunction() : num_(), den_(T(1)) {}
  RationalFunction(const Polynomial<T>& p) : num_(p), den_(T(1)) {}  // NOLINT
  RationalFunction(Polynomial<T> n, Polynomial<T> d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  const Polynomial<T>& numerator() const { return num_; }
  const Polynomial<T>& denominator() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }

  template <class S>
  S evaluate(const S& at) const {
    S d = den_.evaluate(at);
    if (spinrec::is_zero(d)) throw std::domain_error("rational function evaluated at a pole");
    return num_.evaluate(at) / d;
  }

  RationalFunction derivative() const {
    return RationalFunction(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
  }

  RationalFunction operator-() const { return RationalFunction(-num_, den_, true); }
  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    if (b.is_zero()) throw std::domain_error("division by zero rational function");
    return RationalFunction(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  RationalFunction(Polynomial<T> n, Polynomial<T> d, bool) : num_(std::move(n)), den_(std::move(d)) {}
  void normalize() {
    if (den_.is_zero()) throw std::domain_error("rational function with zero denominator");
    if (num_.is_zero()) {
      den_ = Polynomial<T>(T(1));
      return;
    }
    Polynomial<T> g = gcd(num_, den_);
    if (g.degree() > 0) {
      num_ = divmod(num_, g).first;
      den_ = divmod(den_, g).first;
    }
    const T inv = T(1) / den_.leading();
    num_ = num_ * Polynomial<T>(inv);
    den_ = den_ * Polynomial<T>(inv);
  }
  Polynomial<T> num_, den_;
};

/// Converts polynomial coefficients between scalar types.
template <class U, class T>
Polynomial<U> convert(const Polynomial<T>& p) {
  return p.map([](const T& v) { return U(v); });
}
template <class U, class T>
RationalFunction<U> convert(const RationalFunction<T>& f) {
  return RationalFunction<U>(convert<U>(f.numerator()), convert<U>(f.denominator()));
}

/// Absolute precision marker for series with no truncation.
inline constexpr long kExact = std::numeric_limits<long>::max() / 4;

inline long add_precision(long p, long shift) { return p >= kExact ? kExact : p + shift; }

/// Raised when a coefficient past the truncation order is requested.
class TruncationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Truncated Laurent series sum_{e >= val} c_e x^e + O(x^prec).
/// Coefficients are known for all exponents below the absolute precision.
template <class T>
class Series {
 public:
  Series() = default;
  Series(long val, std::vector<T> coeffs, long prec) : val_(val), c_(std::move(coeffs)), prec_(prec) { normalize(); }

  static Series exact(long val, std::vector<T> coeffs) { return Series(val, std::move(coeffs), kExact); }
  static Series constant(const T& c, long prec = kExact) { return Series(0, {c}, prec); }
  static Series monomial(const T& c, long e, long prec = kExact) { return Series(e, {c}, prec); }
  static Series zero(long prec) { return Series(prec >= kExact ? 0 : prec, {}, prec); }
  static Series from_polynomial(const Polynomial<T>& p, long prec = kExact) { return Series(0, p.coeffs(), prec); }

  bool is_exact() const { return prec_ >= kExact; }
  long precision() const { return prec_; }
  /// Smallest exponent with a nonzero coefficient; equals precision for a zero series.
  long valuation() const { return c_.empty() ? prec_ : val_; }
  bool is_zero() const { return c_.empty(); }
  /// Highest stored exponent plus one.
  long stored_end() const { return val_ + static_cast<long>(c_.size()); }

  T coeff(long e) const {
    if (e >= prec_) throw TruncationError("series coefficient requested at exponent " + std::to_string(e) +
                                          " beyond truncation " + std::to_string(prec_));
    if (e < val_ || e >= stored_end()) return T(0);
    return c_[static_cast<std::size_t>(e - val_)];
  }
  T residue() const { return coeff(-1); }

  Series truncate(long prec) const {
    if (prec >= prec_) return *this;
    std::vector<T> out;
    for (long e = val_; e < std::min(prec, stored_end()); ++e) out.push_back(c_[static_cast<std::size_t>(e - val_)]);
    return Series(val_, std::move(out), prec);
  }

  Series operator-() const {
    Series out(*this);
    for (auto& v : out.c_) v = -v;
    return out;
  }

  friend Series operator+(const Series& a, const Series& b) {
    const long prec = std::min(a.prec_, b.prec_);
    if (a.c_.empty() && b.c_.empty()) return zero(prec);
    const long lo = std::min(a.c_.empty() ? b.val_ : a.val_, b.c_.empty() ? a.val_ : b.val_);
    const long hi = std::min(prec, std::max(a.stored_end(), b.stored_end()));
    std::vector<T> out;
    if (hi > lo) out.assign(static_cast<std::size_t>(hi - lo), T(0));
    for (long e = std::max(lo, a.val_); e < std::min(hi, a.stored_end()); ++e)
      out[static_cast<std::size_t>(e - lo)] += a.c_[static_cast<std::size_t>(e - a.val_)];
    for (long e = std::max(lo, b.val_); e < std::min(hi, b.stored_end()); ++e)
      out[static_cast<std::size_t>(e - lo)] += b.c_[static_cast<std::size_t>(e - b.val_)];
    return Series(lo, std::move(out), prec);
  }
  friend Series operator-(const Series& a, const Series& b) { return a + (-b); }

  friend Series operator*(const Series& a, const Series& b) {
    const long prec = std::min(add_precision(a.prec_, b.valuation()), add_precision(b.prec_, a.valuation()));
    if (a.c_.empty() || b.c_.empty()) return zero(prec);
    const long lo = a.val_ + b.val_;
    const long hi = std::min(prec, a.stored_end() + b.stored_end() - 1);
    if (hi <= lo) return zero(prec);
    std::vector<T> out(static_cast<std::size_t>(hi - lo), T(0));
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < a.c_.size() && i < n; ++i) {
      if (spinrec::is_zero(a.c_[i])) continue;
      for (std::size_t j = 0; j < b.c_.size() && i + j < n; ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return Series(lo, std::move(out), prec);
  }

  friend Series operator*(const T& s, const Series& a) {
    Series out(a);
    for (auto& v : out.c_) v = s * v;
    out.normalize();
    return out;
  }

  /// Multiplicative inverse; exact inputs need the absolute precision of the result.
  Series inverse(std::optional<long> prec_hint = std::nullopt) const {
    if (c_.empty()) throw std::domain_error("inverse of a zero series");
    const long v = val_;
    long prec = is_exact() ? kExact : prec_ - 2 * v;
    if (prec_hint) prec = std::min(prec, *prec_hint);
    if (prec >= kExact) throw std::invalid_argument("inverse of an exact series requires a precision");
    const long len = prec - (-v);
    std::vector<T> out;
    if (len > 0) {
      out.assign(static_cast<std::size_t>(len), T(0));
      const T inv0 = T(1) / c_[0];
      out[0] = inv0;
      for (long n = 1; n < len; ++n) {
        T acc(0);
        for (long k = 1; k <= n && k < static_cast<long>(c_.size()); ++k)
          acc += c_[static_cast<std::size_t>(k)] * out[static_cast<std::size_t>(n - k)];
        out[static_cast<std::size_t>(n)] = -acc * inv0;
      }
    }
    return Series(-v, std::move(out), prec);
  }

  Series pow(long e, std::optional<long> prec_hint = std::nullopt) const {
    if (e < 0) return inverse(prec_hint).pow(-e);
    Series out = constant(T(1));
    Series b(*this);
    if (prec_hint) b = b.truncate(*prec_hint);
    while (e) {
      if (e & 1) out = out * b;
      e >>= 1;
      if (e) b = b * b;
    }
    if (prec_hint) out = out.truncate(*prec_hint);
    return out;
  }

  Series derivative() const {
    std::vector<T> out;
    for (std::size_t i = 0; i < c_.size(); ++i) out.push_back(c_[i] * T(val_ + static_cast<long>(i)));
    return Series(val_ - 1, std::move(out), add_precision(prec_, -1));
  }

  /// Multiplies by x^k.
  Series shift(long k) const { return Series(val_ + k, c_, add_precision(prec_, k)); }

  /// f(g) for a power series f and g of positive valuation.
  friend Series compose(const Series& f, const Series& g) {
    if (g.is_zero() || g.valuation() < 1) throw std::domain_error("composition requires an inner series of positive valuation");
    if (!f.is_zero() && f.valuation() < 0) throw std::domain_error("composition requires an outer power series");
    const long vg = g.valuation();
    const long target = f.is_exact() ? kExact : f.prec_ * vg;
    const long hi = f.is_exact() ? f.stored_end() : f.prec_;
    Series acc;
    for (long e = hi - 1; e >= 0; --e) {
      acc = acc * g + constant(f.coeff(e));
      if (target < kExact) acc = acc.truncate(target);
    }
    return target < kExact ? acc.truncate(target) : acc;
  }

  /// Compositional inverse of s = a1 x + a2 x^2 + ...; exact inputs need a precision.
  friend Series reversion(const Series& s, std::optional<long> prec_hint = std::nullopt) {
    if (s.valuation() != 1) throw std::domain_error("reversion requires valuation 1 and invertible linear term");
    long prec = s.prec_;
    if (prec_hint) prec = std::min(prec, *prec_hint);
    if (prec >= kExact) throw std::invalid_argument("reversion of an exact series requires a precision");
    // Lagrange inversion: [w^n] r = (1/n) [z^{n-1}] (z/s)^n.
    Series q = s.shift(-1).inverse(prec - 1);
    std::vector<T> out(static_cast<std::size_t>(std::max(prec - 1, 0L)), T(0));
    Series qn = constant(T(1));
    for (long n = 1; n < prec; ++n) {
      qn = (qn * q).truncate(prec - 1);
      out[static_cast<std::size_t>(n - 1)] = qn.coeff(n - 1) / T(n);
    }
    return Series(1, std::move(out), prec);
  }

  /// Square root with the given root of the leading coefficient.
  Series sqrt_with_leading(const T& lead_root) const {
    if (c_.empty()) throw std::domain_error("square root of a zero series");
    if (val_ % 2 != 0) throw std::domain_error("square root requires an even leading exponent");
    if (!spinrec::is_zero(lead_root * lead_root - c_[0]))
      throw std::domain_error("supplied leading root does not square to the leading coefficient");
    const long v = val_ / 2;
    const long prec = is_exact() ? kExact : prec_ - v;
    if (prec >= kExact) throw std::invalid_argument("square root of an exact series requires truncate() first");
    const long len = prec - v;
    const T inv0 = T(1) / c_[0];
    std::vector<T> f(static_cast<std::size_t>(std::max(len, 0L)), T(0));
    for (long i = 0; i < len && i < static_cast<long>(c_.size()); ++i) f[static_cast<std::size_t>(i)] = c_[static_cast<std::size_t>(i)] * inv0;
    std::vector<T> g(f.size(), T(0));
    if (!g.empty()) g[0] = T(1);
    const T half = T(1) / T(2);
    for (std::size_t n = 1; n < g.size(); ++n) {
      T acc = f[n];
      for (std::size_t k = 1; k < n; ++k) acc -= g[k] * g[n - k];
      g[n] = acc * half;
    }
    for (auto& x : g) x *= lead_root;
    return Series(v, std::move(g), prec);
  }

  template <class F>
  auto map(F&& f) const {
    using U = std::decay_t<decltype(f(std::declval<const T&>()))>;
    std::vector<U> out;
    for (const auto& v : c_) out.push_back(f(v));
    return Series<U>(val_, std::move(out), prec_);
  }

  friend bool operator==(const Series& a, const Series& b) {
    if (a.prec_ != b.prec_) return false;
    return (a - b).is_zero();
  }

 private:
  void normalize() {
    if (prec_ < kExact) {
      const long keep = prec_ - val_;
      if (keep <= 0) c_.clear();
      else if (static_cast<long>(c_.size()) > keep) c_.resize(static_cast<std::size_t>(keep));
    }
    std::size_t lead = 0;
    while (lead < c_.size() && spinrec::is_zero(c_[lead])) ++lead;
    if (lead) {
      c_.erase(c_.begin(), c_.begin() + static_cast<long>(lead));
      val_ += static_cast<long>(lead);
    }
    while (!c_.empty() && spinrec::is_zero(c_.back())) c_.pop_back();
    if (c_.empty()) val_ = prec_ >= kExact ? 0 : prec_;
  }

  long val_ = 0;
  std::vector<T> c_;
  long prec_ = kExact;
};

namespace detail {

inline std::optional<Rational> rational_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  if (!mpz_perfect_square_p(q.get_num_mpz_t()) || !mpz_perfect_square_p(q.get_den_mpz_t())) return std::nullopt;
  Integer n, d;
  mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
  return Rational(n, d);
}

inline std::optional<Rational> scalar_sqrt(const Rational& q) { return rational_sqrt(q); }
inline std::optional<Cyclotomic> scalar_sqrt(const Cyclotomic& x) {
  if (auto q = x.as_rational()) return sqrt_rational(*q);
  return std::nullopt;
}

}  // namespace detail

/// Square root of a truncated series; branch +1 or -1 selects the sign of the principal leading root.
template <class T>
Series<T> sqrt_series(const Series<T>& s, int branch) {
  if (s.is_zero()) throw std::domain_error("square root of a zero series");
  auto root = detail::scalar_sqrt(s.coeff(s.valuation()));
  if (!root) throw std::domain_error("leading coefficient has no square root in the coefficient field");
  T lead = branch >= 0 ? *root : T(-*root);
  return s.sqrt_with_leading(lead);
}

/// Series of f in (z - p) with all coefficients at exponents <= order.
template <class T>
Series<T> laurent_expand(const RationalFunction<T>& f, const T& p, long order) {
  Polynomial<T> num = f.numerator().shift(p);
  Polynomial<T> den = f.denominator().shift(p);
  if (den.is_zero()) throw std::domain_error("laurent expansion of a function with zero denominator");
  long m = 0;
  while (is_zero(den.coeff(m))) ++m;
  std::vector<T> dc(den.coeffs().begin() + m, den.coeffs().end());
  Series<T> dser = Series<T>::exact(0, std::move(dc));
  const long need = order + 1 + m;
  if (need <= 0) return Series<T>::zero(order + 1);
  Series<T> inv = dser.inverse(need);
  Series<T> prod = Series<T>::from_polynomial(num) * inv;
  return prod.shift(-m).truncate(order + 1);
}

/// Gaussian moment map: zeta^{2k} -> (2k-1)!! u^k, odd powers dropped.
/// A double pole is allowed and maps to (-3)!! u^{-1} = -u^{-1}.
template <class T>
Series<T> formal_laplace(const Series<T>& g) {
  if (!g.is_zero() && g.valuation() < -2) throw std::domain_error("formal_laplace accepts at most a double pole");
  const long prec_in = g.precision();
  const long prec = prec_in >= kExact ? kExact : (prec_in + 1) / 2;
  const long hi = prec_in >= kExact ? (g.stored_end() + 1) / 2 : prec;
  const long lo = (!g.is_zero() && g.valuation() < 0) ? -1 : 0;
  std::vector<T> out;
  for (long k = lo; k < hi; ++k) out.push_back(T(Rational(double_factorial_odd(k))) * g.coeff(2 * k));
  return Series<T>(lo, std::move(out), prec);
}

}  // namespace spinrec
