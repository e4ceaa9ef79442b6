#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spinrec/cohft.hpp"
#include "spinrec/lucas.hpp"
#include "spinrec/report.hpp"
#include "spinrec/scalar.hpp"
#include "spinrec/symbolic.hpp"

namespace spinrec {

using CSeries = Series<Cyclotomic>;
using CPoly = Polynomial<Cyclotomic>;
using RPoly = Polynomial<Rational>;
using RFunc = RationalFunction<Rational>;

// ---------------------------------------------------------------------------------------------
// Curves

enum class CurveFamily { Hat, Tilde, RAiry };

inline std::string family_name(CurveFamily f) {
  switch (f) {
    case CurveFamily::Hat: return "hat";
    case CurveFamily::Tilde: return "tilde";
    default: return "r-airy";
  }
}

inline CurveFamily parse_family(const std::string& s) {
  if (s == "hat") return CurveFamily::Hat;
  if (s == "tilde") return CurveFamily::Tilde;
  if (s == "r-airy" || s == "rairy") return CurveFamily::RAiry;
  throw std::invalid_argument("unknown curve family '" + s + "'");
}

struct RamPoint {
  long label = 0;  // k in alpha_k
  Cyclotomic alpha;
  Cyclotomic x_value;
  long order = 1;  // order of vanishing of dx
};

/// y = z and omega_{0,2} = dz1 dz2/(z1 - z2)^2 throughout.
struct SpectralCurve {
  CurveFamily family = CurveFamily::RAiry;
  long r = 2;
  Rational lambda = 1;
  RPoly x;
  std::vector<RamPoint> ram;

  CPoly x_cyclotomic() const { return x.map([](const Rational& q) { return Cyclotomic(q); }); }
  std::string key() const { return family_name(family) + "/" + std::to_string(r) + "/" + to_string(lambda); }
  /// A priori bound on pole orders of omega_{g,n} at any ramification point.
  long pole_budget(long g, long n) const {
    if (family == CurveFamily::RAiry) return r * (3 * g - 2 + n);
    return 6 * g - 4 + 2 * n;
  }
};

inline SpectralCurve build_curve(CurveFamily family, long r, const Rational& lambda = 1) {
  SpectralCurve c;
  c.family = family;
  c.r = r;
  c.lambda = lambda;
  if (family == CurveFamily::RAiry) {
    if (r < 2) throw std::invalid_argument("r-airy curve requires r >= 2");
    c.x = RPoly::monomial(Rational(1), static_cast<std::size_t>(r));
    c.ram.push_back({0, Cyclotomic(0), Cyclotomic(0), r - 1});
    return c;
  }
  if (r < 3) throw std::invalid_argument("family curves require r >= 3");
  if (is_zero(lambda)) throw std::invalid_argument("lambda must be nonzero for family curves");
  if (family == CurveFamily::Hat) {
    c.x = at_t(lucas_v(r), Rational(lambda * lambda));
    for (long k = 1; k <= r - 1; ++k) {
      const Cyclotomic a = Cyclotomic(2 * lambda) * cosine_value(k, r);
      c.ram.push_back({k, a, Cyclotomic((k % 2 == 0 ? 2 : -2) * rational_pow(lambda, r)), 1});
    }
  } else {
    c.x = RPoly::monomial(Rational(1), static_cast<std::size_t>(r)) -
          RPoly::monomial(Rational(r) * rational_pow(lambda, r - 1), 1);
    for (long k = 0; k <= r - 2; ++k) {
      const Cyclotomic theta_k = root_of_unity(r - 1, k);
      c.ram.push_back({k, Cyclotomic(lambda) * theta_k, Cyclotomic(-(r - 1) * rational_pow(lambda, r)) * theta_k, 1});
    }
  }
  const CPoly xc = c.x_cyclotomic();
  const CPoly xd = xc.derivative(), xdd = xd.derivative();
  for (const auto& p : c.ram) {
    if (!xd.evaluate(p.alpha).is_zero()) throw ConsistencyError("ramification point is not a zero of dx");
    if (xdd.evaluate(p.alpha).is_zero()) throw ConsistencyError("ramification point is not simple");
    if (xc.evaluate(p.alpha) != p.x_value) throw ConsistencyError("branch value mismatch at a ramification point");
  }
  return c;
}

namespace specrec_detail {

/// Taylor coefficients of x(alpha + t) - x(alpha) as an exact series in t.
inline CSeries centred_x(const SpectralCurve& c, std::size_t i) {
  const CPoly shifted = c.x_cyclotomic().shift(c.ram[i].alpha);
  std::vector<Cyclotomic> co = shifted.coeffs();
  if (!co.empty()) co[0] = Cyclotomic(0);
  return CSeries::exact(0, std::move(co));
}

}  // namespace specrec_detail

/// s(t) with sigma_i(alpha_i + t) = alpha_i + s(t), known for exponents below `order`.
inline CSeries local_involution(const SpectralCurve& c, std::size_t i, long order) {
  if (i >= c.ram.size()) throw std::out_of_range("ramification index");
  if (c.ram[i].order != 1) throw std::invalid_argument("local involution requires a simple ramification point");
  if (order < 2) throw std::invalid_argument("local involution needs order >= 2");
  const CSeries dx = specrec_detail::centred_x(c, i);
  const Cyclotomic c2 = dx.coeff(2);
  // x(alpha+t) - x(alpha) = c2 psi(t)^2 with psi = t + O(t^2); sigma is psi^{-1}(-psi(t)).
  const CSeries f = (c2.inverse() * dx.shift(-2)).truncate(order + 1);
  const CSeries psi = f.sqrt_with_leading(Cyclotomic(1)).shift(1);
  const CSeries inv = reversion(psi, order + 1);
  const CSeries s = compose(inv, -psi).truncate(order);
  return s;
}

// ---------------------------------------------------------------------------------------------
// Correlators

/// (ramification index, pole order)
using Pole = std::pair<long, long>;

/// omega_{g,n} = sum c * prod_j dz_j/(z_j - alpha_{i_j})^{d_j}; keys are sorted, coefficients are those of each ordering.
struct Correlator {
  long g = 0;
  long n = 0;
  std::map<std::vector<Pole>, Cyclotomic> entries;

  Cyclotomic coeff(std::vector<Pole> ordered) const {
    std::sort(ordered.begin(), ordered.end());
    auto it = entries.find(ordered);
    return it == entries.end() ? Cyclotomic(0) : it->second;
  }

  /// Every ordered tuple with a nonzero coefficient.
  std::vector<std::pair<std::vector<Pole>, Cyclotomic>> ordered_entries() const {
    std::vector<std::pair<std::vector<Pole>, Cyclotomic>> out;
    for (const auto& [key, c] : entries) {
      std::vector<Pole> p = key;
      do out.emplace_back(p, c);
      while (std::next_permutation(p.begin(), p.end()));
    }
    return out;
  }

  long max_order() const {
    long m = 0;
    for (const auto& [key, c] : entries)
      for (const auto& p : key) m = std::max(m, p.second);
    return m;
  }
};

namespace specrec_detail {

using OrderedMap = std::map<std::vector<Pole>, Cyclotomic>;

inline Correlator symmetrize_checked(long g, long n, const OrderedMap& ordered, const std::string& what) {
  Correlator out;
  out.g = g;
  out.n = n;
  for (const auto& [key, c] : ordered) {
    if (c.is_zero()) continue;
    std::vector<Pole> sorted = key;
    std::sort(sorted.begin(), sorted.end());
    auto it = out.entries.find(sorted);
    if (it == out.entries.end()) {
      out.entries.emplace(sorted, c);
    } else if (it->second != c) {
      throw ConsistencyError(what + ": omega_{" + std::to_string(g) + "," + std::to_string(n) + "} is not symmetric");
    }
  }
  // Every permutation of a stored key must be present as well.
  for (const auto& [key, c] : out.entries) {
    std::vector<Pole> p = key;
    do {
      auto it = ordered.find(p);
      if (it == ordered.end() || it->second != c)
        throw ConsistencyError(what + ": omega_{" + std::to_string(g) + "," + std::to_string(n) + "} is not symmetric");
    } while (std::next_permutation(p.begin(), p.end()));
  }
  return out;
}

// Integrand of the recursion: ordered poles of the remaining variables -> series in the local coordinate.
using Integrand = std::map<std::vector<Pole>, CSeries>;

inline void accumulate(Integrand& acc, const std::vector<Pole>& key, const CSeries& s) {
  if (s.is_zero()) return;
  auto it = acc.find(key);
  if (it == acc.end()) acc.emplace(key, s);
  else it->second = it->second + s;
}

/// Local data at one simple ramification point, at a fixed truncation.
class LocalData {
 public:
  LocalData(const SpectralCurve& c, std::size_t i, long prec) : curve_(c), index_(i), prec_(prec) {
    s_ = local_involution(c, i, prec);
    ds_ = s_.derivative();
    const CSeries t = CSeries::monomial(Cyclotomic(1), 1);
    const CPoly xd = c.x_cyclotomic().derivative().shift(c.ram[i].alpha);
    const CSeries xprime = CSeries::from_polynomial(xd);
    kernel_den_inv_ = (Cyclotomic(2) * ((t - s_) * xprime)).inverse();
  }

  long precision() const { return prec_; }
  const CSeries& s() const { return s_; }
  const CSeries& ds() const { return ds_; }

  /// Coefficient of dz1/(z1 - alpha)^{m+1} in the kernel, as a series in t (the dz factor removed).
  const CSeries& kernel(long m) {
    while (static_cast<long>(kernels_.size()) <= m) {
      const long k = static_cast<long>(kernels_.size());
      const CSeries tk = CSeries::monomial(Cyclotomic(1), k);
      kernels_.push_back((tk - s_pow(k)) * kernel_den_inv_);
    }
    return kernels_[static_cast<std::size_t>(m)];
  }

  CSeries s_pow(long m) {
    while (static_cast<long>(s_pows_.size()) <= m)
      s_pows_.push_back(s_pows_.empty() ? CSeries::constant(Cyclotomic(1)) : s_pows_.back() * s_);
    return s_pows_[static_cast<std::size_t>(m)];
  }

  /// 1/(z - alpha_j)^d at z = alpha + t.
  const CSeries& z_factor(const Pole& p) {
    auto it = z_cache_.find(p);
    if (it != z_cache_.end()) return it->second;
    CSeries v;
    if (static_cast<std::size_t>(p.first) == index_) {
      v = CSeries::monomial(Cyclotomic(1), -p.second);
    } else {
      const Cyclotomic delta = curve_.ram[index_].alpha - curve_.ram[static_cast<std::size_t>(p.first)].alpha;
      v = CSeries::exact(0, {delta, Cyclotomic(1)}).inverse(prec_).pow(p.second);
    }
    return z_cache_.emplace(p, std::move(v)).first->second;
  }

  /// 1/(sigma(z) - alpha_j)^d times sigma'(z) at z = alpha + t.
  const CSeries& sigma_factor(const Pole& p) {
    auto it = s_cache_.find(p);
    if (it != s_cache_.end()) return it->second;
    CSeries base;
    if (static_cast<std::size_t>(p.first) == index_) {
      base = s_;
    } else {
      const Cyclotomic delta = curve_.ram[index_].alpha - curve_.ram[static_cast<std::size_t>(p.first)].alpha;
      base = s_ + CSeries::constant(delta);
    }
    CSeries v = base.inverse(prec_).pow(p.second) * ds_;
    return s_cache_.emplace(p, std::move(v)).first->second;
  }

  /// omega_{0,2}(z, sigma z) / dz^2.
  CSeries diagonal_bidifferential() {
    const CSeries t = CSeries::monomial(Cyclotomic(1), 1);
    const CSeries d = t - s_;
    return ds_ * (d * d).inverse(prec_);
  }

 private:
  const SpectralCurve& curve_;
  std::size_t index_;
  long prec_;
  CSeries s_, ds_, kernel_den_inv_;
  std::vector<CSeries> kernels_, s_pows_;
  std::map<Pole, CSeries> z_cache_, s_cache_;
};

}  // namespace specrec_detail

/// Eynard-Orantin recursion with exact residues at simple ramification points; results memoized per curve.
class EoEngine {
 public:
  explicit EoEngine(SpectralCurve c) : curve_(std::move(c)) {
    for (const auto& p : curve_.ram)
      if (p.order != 1) throw std::invalid_argument("Eynard-Orantin recursion needs simple ramification");
  }

  const SpectralCurve& curve() const { return curve_; }

  Correlator correlator(long g, long n) {
    if (g < 0 || n < 1 || !is_stable(g, n)) throw std::invalid_argument("eo_recursion requires 2g - 2 + n > 0 and n >= 1");
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find({g, n});
      if (it != memo_.end()) return it->second;
    }
    Correlator out = compute(g, n);
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.emplace(std::make_pair(g, n), std::move(out)).first->second;
  }

 private:
  using Integrand = specrec_detail::Integrand;

  Correlator compute(long g, long n) {
    const long budget = curve_.pole_budget(g, n);
    const long prec = 2 * budget + 12;
    specrec_detail::OrderedMap ordered;
    const std::size_t rest = static_cast<std::size_t>(n - 1);
    for (std::size_t i = 0; i < curve_.ram.size(); ++i) {
      specrec_detail::LocalData local(curve_, i, prec);
      Integrand f;
      // omega_{g-1,n+1}(z, sigma z, J)
      if (g >= 1) {
        if (g == 1 && n == 1) {
          specrec_detail::accumulate(f, {}, local.diagonal_bidifferential());
        } else {
          const Correlator w = correlator(g - 1, n + 1);
          for (const auto& [key, c] : w.ordered_entries()) {
            std::vector<Pole> jkey(key.begin() + 2, key.end());
            specrec_detail::accumulate(f, jkey, c * (local.z_factor(key[0]) * local.sigma_factor(key[1])));
          }
        }
      }
      // Products over splittings of J, excluding (0,1) factors.
      for (std::size_t mask = 0; mask < (std::size_t(1) << rest); ++mask) {
        std::vector<std::size_t> left, right;
        for (std::size_t j = 0; j < rest; ++j) ((mask >> j) & 1 ? left : right).push_back(j);
        for (long g1 = 0; g1 <= g; ++g1) {
          const long g2 = g - g1;
          const long n1 = 1 + static_cast<long>(left.size()), n2 = 1 + static_cast<long>(right.size());
          if ((g1 == 0 && n1 == 1) || (g2 == 0 && n2 == 1)) continue;
          const auto a = slot_terms(local, i, g1, left, false, budget);
          const auto b = slot_terms(local, i, g2, right, true, budget);
          for (const auto& [ka, sa] : a)
            for (const auto& [kb, sb] : b) {
              std::vector<Pole> jkey(rest);
              for (std::size_t q = 0; q < left.size(); ++q) jkey[left[q]] = ka[q];
              for (std::size_t q = 0; q < right.size(); ++q) jkey[right[q]] = kb[q];
              specrec_detail::accumulate(f, jkey, sa * sb);
            }
        }
      }
      for (const auto& [jkey, series] : f) {
        if (series.is_zero()) continue;
        const long top = 1 - series.valuation();
        for (long m = 0; m <= top; ++m) {
          const Cyclotomic res = (local.kernel(m) * series).coeff(-1);
          if (res.is_zero()) continue;
          std::vector<Pole> key{{static_cast<long>(i), m + 1}};
          key.insert(key.end(), jkey.begin(), jkey.end());
          ordered[key] += res;
        }
      }
    }
    Correlator out = specrec_detail::symmetrize_checked(g, n, ordered, "eo_recursion");
    if (out.max_order() > budget)
      throw ConsistencyError("eo_recursion produced pole order " + std::to_string(out.max_order()) +
                             " beyond the budget " + std::to_string(budget));
    return out;
  }

  // Terms of omega_{g', 1+|labels|}(z or sigma z, z_labels) as (poles of the labelled variables, series in t).
  std::vector<std::pair<std::vector<Pole>, CSeries>> slot_terms(specrec_detail::LocalData& local, std::size_t i, long gp,
                                                               const std::vector<std::size_t>& labels, bool sigma,
                                                               long budget) {
    std::vector<std::pair<std::vector<Pole>, CSeries>> out;
    const long np = 1 + static_cast<long>(labels.size());
    if (gp == 0 && np == 2) {
      // omega_{0,2}(z, z_j) = sum_m (m+1) t^m dz dz_j/(z_j - alpha)^{m+2}, likewise with s(t) for sigma z.
      for (long m = 0; m + 2 <= budget + 2; ++m) {
        CSeries s = sigma ? local.s_pow(m) * local.ds() : CSeries::monomial(Cyclotomic(1), m);
        out.push_back({{Pole{static_cast<long>(i), m + 2}}, Cyclotomic(m + 1) * s});
      }
      return out;
    }
    const Correlator w = correlator(gp, np);
    for (const auto& [key, c] : w.ordered_entries()) {
      std::vector<Pole> rest(key.begin() + 1, key.end());
      const CSeries& factor = sigma ? local.sigma_factor(key[0]) : local.z_factor(key[0]);
      out.push_back({rest, c * factor});
    }
    return out;
  }

  SpectralCurve curve_;
  std::mutex mu_;
  std::map<std::pair<long, long>, Correlator> memo_;
};

namespace specrec_detail {

template <class Engine, class Arg>
std::shared_ptr<Engine> registry_get(const std::string& key, const Arg& arg) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<Engine>> engines;
  std::lock_guard<std::mutex> lock(mu);
  auto it = engines.find(key);
  if (it != engines.end()) return it->second;
  auto e = std::make_shared<Engine>(arg);
  engines.emplace(key, e);
  return e;
}

}  // namespace specrec_detail

inline Correlator eo_recursion(const SpectralCurve& c, long g, long n) {
  return specrec_detail::registry_get<EoEngine>(c.key(), c)->correlator(g, n);
}

// ---------------------------------------------------------------------------------------------
// Bouchard-Eynard recursion on x = z^r, y = z

/// Higher recursion at the single ramification point z = 0, summing over deck transformations z -> zeta_r^j z.
class BeEngine {
 public:
  explicit BeEngine(long r) : r_(r) {
    if (r < 2) throw std::invalid_argument("be_recursion requires r >= 2");
  }

  Correlator correlator(long g, long n) {
    if (g < 0 || n < 1 || !is_stable(g, n)) throw std::invalid_argument("be_recursion requires 2g - 2 + n > 0 and n >= 1");
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find({g, n});
      if (it != memo_.end()) return it->second;
    }
    Correlator out = compute(g, n);
    std::lock_guard<std::mutex> lock(mu_);
    return memo_.emplace(std::make_pair(g, n), std::move(out)).first->second;
  }

 private:
  // A term: pole orders of the labelled variables (0 = not yet assigned) and the power of z.
  using Term = std::pair<std::vector<long>, long>;
  using Terms = std::map<Term, Cyclotomic>;

  Cyclotomic zeta(long e) const { return root_of_unity(r_, ((e % r_) + r_) % r_); }

  long budget(long g, long n) const { return r_ * (3 * g - 2 + n); }

  static void add(Terms& t, const Term& k, const Cyclotomic& c) {
    if (c.is_zero()) return;
    auto it = t.find(k);
    if (it == t.end()) t.emplace(k, c);
    else it->second += c;
  }

  static Terms multiply(const Terms& a, const Terms& b) {
    Terms out;
    for (const auto& [ka, ca] : a)
      for (const auto& [kb, cb] : b) {
        std::vector<long> poles = ka.first;
        for (std::size_t q = 0; q < poles.size(); ++q)
          if (kb.first[q]) poles[q] = kb.first[q];
        add(out, {poles, ka.second + kb.second}, ca * cb);
      }
    return out;
  }

  // omega_{g', |slots| + |labels|}(sigma^{slots} z, z_labels), expanded as monomials in z.
  Terms block(long gp, const std::vector<long>& slots, const std::vector<std::size_t>& labels, std::size_t nlabels,
              long out_budget) {
    Terms out;
    const long np = static_cast<long>(slots.size() + labels.size());
    if (gp == 0 && np == 2) {
      if (slots.size() == 2) {
        const Cyclotomic d = zeta(slots[0]) - zeta(slots[1]);
        add(out, {std::vector<long>(nlabels, 0), -2}, zeta(slots[0] + slots[1]) / (d * d));
      } else {
        const long j = slots[0];
        for (long m = 0; m + 2 <= out_budget + 2; ++m) {
          std::vector<long> poles(nlabels, 0);
          poles[labels[0]] = m + 2;
          add(out, {poles, m}, Cyclotomic(m + 1) * zeta(j * (m + 1)));
        }
      }
      return out;
    }
    const Correlator w = correlator(gp, np);
    for (const auto& [key, c] : w.ordered_entries()) {
      std::vector<long> poles(nlabels, 0);
      long e = 0;
      Cyclotomic coef = c;
      for (std::size_t q = 0; q < slots.size(); ++q) {
        const long d = key[q].second;
        coef *= zeta(slots[q] * (1 - d));
        e -= d;
      }
      for (std::size_t q = 0; q < labels.size(); ++q) poles[labels[q]] = key[slots.size() + q].second;
      add(out, {poles, e}, coef);
    }
    return out;
  }

  static void set_partitions(const std::vector<long>& items, std::size_t idx, std::vector<std::vector<long>>& cur,
                             const std::function<void(const std::vector<std::vector<long>>&)>& visit) {
    if (idx == items.size()) {
      visit(cur);
      return;
    }
    for (std::size_t b = 0; b < cur.size(); ++b) {
      cur[b].push_back(items[idx]);
      set_partitions(items, idx + 1, cur, visit);
      cur[b].pop_back();
    }
    cur.push_back({items[idx]});
    set_partitions(items, idx + 1, cur, visit);
    cur.pop_back();
  }

  Correlator compute(long g, long n) {
    const std::size_t nl = static_cast<std::size_t>(n - 1);
    const long out_budget = budget(g, n);
    specrec_detail::OrderedMap ordered;
    for (std::size_t mask = 1; mask < (std::size_t(1) << (r_ - 1)); ++mask) {
      std::vector<long> I;
      for (long j = 1; j <= r_ - 1; ++j)
        if ((mask >> (j - 1)) & 1) I.push_back(j);
      const long size_i = static_cast<long>(I.size());
      Cyclotomic prefactor((size_i % 2 == 1) ? 1 : -1);  // (-1)^{|I|+1}
      for (long j : I) prefactor /= Cyclotomic(r_) * (Cyclotomic(1) - zeta(j));
      std::vector<long> slots{0};
      slots.insert(slots.end(), I.begin(), I.end());
      Terms total;
      std::vector<std::vector<long>> cur;
      set_partitions(slots, 0, cur, [&](const std::vector<std::vector<long>>& blocks) {
        const std::size_t ell = blocks.size();
        const long G = g + static_cast<long>(ell) - size_i - 1;
        if (G < 0) return;
        // Distribute the labelled variables among the blocks.
        std::vector<std::size_t> owner(nl, 0);
        while (true) {
          std::vector<std::vector<std::size_t>> lab(ell);
          for (std::size_t q = 0; q < nl; ++q) lab[owner[q]].push_back(q);
          std::vector<long> gs(ell, 0);
          distribute_genus(blocks, lab, gs, 0, G, nl, out_budget, total);
          std::size_t q = 0;
          while (q < nl && ++owner[q] == ell) owner[q++] = 0;
          if (q == nl) break;
        }
      });
      for (const auto& [term, c] : total) {
        const long e = term.second;
        const long m = r_ * size_i - e - 1;
        if (m < 0) continue;
        std::vector<Pole> key{{0, m + 1}};
        for (long d : term.first) {
          if (d == 0) throw ConsistencyError("be_recursion left a variable unassigned");
          key.push_back({0, d});
        }
        ordered[key] += prefactor * c;
      }
    }
    Correlator out = specrec_detail::symmetrize_checked(g, n, ordered, "be_recursion");
    for (const auto& [key, c] : out.entries) {
      if (!c.is_rational()) throw ConsistencyError("be_recursion produced a non-rational coefficient");
      for (const auto& p : key)
        if (p.second > out_budget) throw ConsistencyError("be_recursion exceeded its pole budget");
    }
    return out;
  }

  void distribute_genus(const std::vector<std::vector<long>>& blocks, const std::vector<std::vector<std::size_t>>& lab,
                        std::vector<long>& gs, std::size_t b, long left, std::size_t nl, long out_budget, Terms& total) {
    if (b == blocks.size()) {
      if (left != 0) return;
      Terms acc;
      acc.emplace(Term{std::vector<long>(nl, 0), 0}, Cyclotomic(1));
      for (std::size_t q = 0; q < blocks.size(); ++q) {
        acc = multiply(acc, block(gs[q], blocks[q], lab[q], nl, out_budget));
        if (acc.empty()) return;
      }
      for (const auto& [k, c] : acc) add(total, k, c);
      return;
    }
    for (long gb = 0; gb <= left; ++gb) {
      const long nb = static_cast<long>(blocks[b].size() + lab[b].size());
      if (gb == 0 && nb == 1) continue;
      gs[b] = gb;
      distribute_genus(blocks, lab, gs, b + 1, left - gb, nl, out_budget, total);
    }
  }

  long r_;
  std::mutex mu_;
  std::map<std::pair<long, long>, Correlator> memo_;
};

inline Correlator be_recursion(long r, long g, long n) {
  return specrec_detail::registry_get<BeEngine>("be/" + std::to_string(r), r)->correlator(g, n);
}

/// Correlator of a curve by whichever recursion applies.
inline Correlator tr_correlator(const SpectralCurve& c, long g, long n) {
  if (c.family == CurveFamily::RAiry && c.r > 2) return be_recursion(c.r, g, n);
  return eo_recursion(c, g, n);
}

// ---------------------------------------------------------------------------------------------
// Xi-bases and extraction

/// Flat-basis auxiliary functions xi^a and dxi^{k,a} = d((d/dx)^k xi^a).
struct XiBasis {
  long r = 2;
  RPoly xprime;
  std::vector<RFunc> xi;

  /// dxi^{k,a}/dz
  RFunc dxi(long k, long a) const {
    RFunc f = xi.at(static_cast<std::size_t>(a));
    const RFunc inv_xp(RPoly(Rational(1)), xprime);
    for (long j = 0; j < k; ++j) f = f.derivative() * inv_xp;
    return f.derivative();
  }
};

inline XiBasis xi_basis(const SpectralCurve& c) {
  XiBasis b;
  b.r = c.r;
  b.xprime = c.x.derivative();
  const long r = c.r;
  for (long a = 0; a <= r - 2; ++a) {
    switch (c.family) {
      case CurveFamily::Hat: {
        const Rational t = c.lambda * c.lambda;
        b.xi.emplace_back(-at_t(lucas_u(r - 1 - a), t), at_t(lucas_u(r), t));
        break;
      }
      case CurveFamily::Tilde: {
        const RPoly den = RPoly::monomial(Rational(1), static_cast<std::size_t>(r - 1)) - RPoly(rational_pow(c.lambda, r - 1));
        b.xi.emplace_back(RPoly::monomial(Rational(-1), static_cast<std::size_t>(r - 2 - a)), den);
        break;
      }
      case CurveFamily::RAiry:
        b.xi.emplace_back(RPoly(Rational(-1)), RPoly::monomial(Rational(1), static_cast<std::size_t>(a + 1)));
        break;
    }
  }
  return b;
}

/// Closed form of the r-airy differentials: dxi^{k,a} = (-1)^k r prod_{j=0}^{k}((a+1)/r + j) dz / z^{kr+a+2}.
inline Rational rairy_xi_coefficient(long r, long k, long a) {
  Rational c = Rational((k % 2 == 0) ? r : -r);
  for (long j = 0; j <= k; ++j) c *= make_rational(a + 1, r) + Rational(j);
  return c;
}

namespace specrec_detail {

/// Principal parts of a proper rational function at the ramification points, as elementary pole coefficients.
inline std::map<Pole, Cyclotomic> pole_expansion(const SpectralCurve& c, const RFunc& f) {
  if (f.numerator().degree() >= f.denominator().degree() && !f.is_zero())
    throw ConsistencyError("basis differential is not proper; it would have a pole at infinity");
  const RationalFunction<Cyclotomic> fc = convert<Cyclotomic>(f);
  std::map<Pole, Cyclotomic> out;
  for (std::size_t i = 0; i < c.ram.size(); ++i) {
    const CSeries s = laurent_expand(fc, c.ram[i].alpha, -1);
    if (s.is_zero()) continue;
    for (long e = s.valuation(); e <= -1; ++e) {
      Cyclotomic v = s.coeff(e);
      if (!v.is_zero()) out.emplace(Pole{static_cast<long>(i), -e}, v);
    }
  }
  return out;
}

using CMatrix = std::vector<std::vector<Cyclotomic>>;

/// Row indices of a maximal independent row set and the inverse of that square submatrix.
inline std::pair<std::vector<std::size_t>, CMatrix> left_inverse(const CMatrix& m, std::size_t cols) {
  const std::size_t rows = m.size();
  CMatrix work = m;
  std::vector<std::size_t> pivots;
  // Row-reduce the transpose's view: pick rows greedily via elimination on copies.
  std::vector<std::vector<Cyclotomic>> basis;  // reduced rows
  std::vector<std::size_t> lead;                // leading column of each reduced row
  for (std::size_t i = 0; i < rows && pivots.size() < cols; ++i) {
    std::vector<Cyclotomic> v = work[i];
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (v[lead[b]].is_zero()) continue;
      const Cyclotomic f = v[lead[b]];
      for (std::size_t j = 0; j < cols; ++j) v[j] -= f * basis[b][j];
    }
    std::size_t l = 0;
    while (l < cols && v[l].is_zero()) ++l;
    if (l == cols) continue;
    const Cyclotomic inv = v[l].inverse();
    for (auto& x : v) x *= inv;
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (basis[b][l].is_zero()) continue;
      const Cyclotomic f = basis[b][l];
      for (std::size_t j = 0; j < cols; ++j) basis[b][j] -= f * v[j];
    }
    basis.push_back(std::move(v));
    lead.push_back(l);
    pivots.push_back(i);
  }
  if (pivots.size() != cols) throw ConsistencyError("basis differentials are linearly dependent on the pole data");
  // Invert the square submatrix A (rows = pivots) by Gauss-Jordan.
  const std::size_t n = cols;
  CMatrix a(n, std::vector<Cyclotomic>(2 * n, Cyclotomic(0)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m[pivots[i]][j];
    a[i][n + i] = Cyclotomic(1);
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t p = col;
    while (p < n && a[p][col].is_zero()) ++p;
    if (p == n) throw ConsistencyError("singular pivot block in basis extraction");
    std::swap(a[p], a[col]);
    const Cyclotomic inv = a[col][col].inverse();
    for (auto& x : a[col]) x *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col].is_zero()) continue;
      const Cyclotomic f = a[i][col];
      for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[col][j];
    }
  }
  // A^{-1}: maps values on pivot rows to basis coefficients. Stored as [basis][pivot].
  CMatrix inv(n, std::vector<Cyclotomic>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[j][i] = a[j][n + i];
  return {pivots, inv};
}

}  // namespace specrec_detail

/// Expands omega_{g,n} in prod dxi^{k_i,a_i}(z_i), divides by (-r)^{g-1}, and returns every insertion multiset
/// with total psi-power at most 3g - 3 + n (zeros included).
inline IntersectionTable extract_intersections(const Correlator& corr, const XiBasis& basis, const SpectralCurve& curve) {
  using namespace specrec_detail;
  const long g = corr.g, n = corr.n, r = basis.r;
  const long K = moduli_dimension(g, n);
  std::vector<Insertion> labels;
  for (long k = 0; k <= K; ++k)
    for (long a = 0; a <= r - 2; ++a) labels.push_back({a, k});
  const std::size_t B = labels.size();
  std::vector<std::map<Pole, Cyclotomic>> columns;
  std::set<Pole> pole_set;
  for (const auto& l : labels) {
    columns.push_back(pole_expansion(curve, basis.dxi(l.k, l.a)));
    for (const auto& [p, v] : columns.back()) pole_set.insert(p);
  }
  for (const auto& [key, c] : corr.entries)
    for (const auto& p : key)
      if (!pole_set.count(p))
        throw ConsistencyError("correlator has pole (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                               ") outside the span of the basis differentials");
  const std::vector<Pole> poles(pole_set.begin(), pole_set.end());
  std::map<Pole, std::size_t> pole_index;
  for (std::size_t i = 0; i < poles.size(); ++i) pole_index[poles[i]] = i;
  CMatrix m(poles.size(), std::vector<Cyclotomic>(B, Cyclotomic(0)));
  for (std::size_t b = 0; b < B; ++b)
    for (const auto& [p, v] : columns[b]) m[pole_index[p]][b] = v;
  const auto [pivots, inv] = left_inverse(m, B);
  std::map<std::size_t, std::size_t> pivot_slot;
  for (std::size_t i = 0; i < pivots.size(); ++i) pivot_slot[pivots[i]] = i;

  // Apply the left inverse slot by slot. Keys hold basis indices for processed slots, pole indices otherwise.
  using Key = std::vector<std::size_t>;
  std::map<Key, Cyclotomic> cur;
  for (const auto& [ordered, c] : corr.ordered_entries()) {
    Key k;
    for (const auto& p : ordered) k.push_back(pole_index.at(p));
    cur[k] += c;
  }
  const std::map<Key, Cyclotomic> original = cur;
  for (std::size_t slot = 0; slot < static_cast<std::size_t>(n); ++slot) {
    std::map<Key, Cyclotomic> next;
    for (const auto& [k, c] : cur) {
      auto it = pivot_slot.find(k[slot]);
      if (it == pivot_slot.end()) continue;
      for (std::size_t b = 0; b < B; ++b) {
        const Cyclotomic& w = inv[b][it->second];
        if (w.is_zero()) continue;
        Key k2 = k;
        k2[slot] = b;
        next[k2] += c * w;
      }
    }
    cur.clear();
    for (auto& [k, c] : next)
      if (!c.is_zero()) cur.emplace(k, c);
  }
  // Reconstruct and compare.
  std::map<Key, Cyclotomic> back = cur;
  for (std::size_t slot = 0; slot < static_cast<std::size_t>(n); ++slot) {
    std::map<Key, Cyclotomic> next;
    for (const auto& [k, c] : back)
      for (const auto& [p, v] : columns[k[slot]]) {
        Key k2 = k;
        k2[slot] = pole_index.at(p);
        next[k2] += c * v;
      }
    back.clear();
    for (auto& [k, c] : next)
      if (!c.is_zero()) back.emplace(k, c);
  }
  if (back != original) throw ConsistencyError("extraction residual: correlator is not in the span of the dxi basis");

  IntersectionTable table;
  table.r = r;
  table.lambda = curve.lambda;
  table.variant = curve.family == CurveFamily::Hat ? Variant::Hat
                  : curve.family == CurveFamily::Tilde ? Variant::Tilde
                                                       : Variant::Limit;
  const Cyclotomic scale = Cyclotomic(rational_pow(Rational(-r), g - 1));
  for (const auto& ins : insertion_multisets(r - 1, g, n)) table.set(g, ins, Rational(0));
  for (const auto& [k, c] : cur) {
    std::vector<Insertion> ins;
    long psi = 0;
    for (std::size_t b : k) {
      ins.push_back(labels[b]);
      psi += labels[b].k;
    }
    const Rational v = require_rational(c / scale, "extracted intersection number");
    if (psi > K) {
      if (!is_zero(v)) throw ConsistencyError("nonzero coefficient beyond the moduli dimension");
      continue;
    }
    auto prev = table.get(g, ins);
    if (prev && !is_zero(*prev) && *prev != v) throw ConsistencyError("extracted numbers are not symmetric");
    table.set(g, ins, v);
  }
  return table;
}

/// Correlator extraction for a curve at (g, n).
inline IntersectionTable tr_intersections(const SpectralCurve& c, long g, long n) {
  return extract_intersections(tr_correlator(c, g, n), xi_basis(c), c);
}

// ---------------------------------------------------------------------------------------------
// String and dilaton equations on tables

/// String: <tau_0(v_0) prod tau_{k_i}(v_{a_i})>_g = sum_j <... tau_{k_j - 1}(v_{a_j}) ...>_g.
/// Dilaton: <tau_1(v_0) prod>_g = (2g - 2 + n) <prod>_g. Only instances whose right side lies in the table are checked.
inline Report string_dilaton_check(const IntersectionTable& table) {
  Report rep;
  std::set<std::pair<long, long>> covered;
  for (const auto& [key, v] : table.entries) covered.insert({key.first, static_cast<long>(key.second.size())});
  auto lookup = [&](long g, std::vector<Insertion> ins) -> std::optional<Rational> {
    if (!covered.count({g, static_cast<long>(ins.size())})) return std::nullopt;
    for (const auto& x : ins)
      if (x.k < 0) return Rational(0);
    auto v = table.get(g, ins);
    return v ? *v : Rational(0);
  };
  for (const auto& [key, value] : table.entries) {
    const long g = key.first;
    const auto& ins = key.second;
    const long n = static_cast<long>(ins.size());
    if (!is_stable(g, n - 1)) continue;
    for (std::size_t pos = 0; pos < ins.size(); ++pos) {
      if (ins[pos].a != 0 || ins[pos].k > 1) continue;
      if (pos > 0 && ins[pos] == ins[pos - 1]) continue;
      std::vector<Insertion> rest = ins;
      rest.erase(rest.begin() + static_cast<long>(pos));
      if (ins[pos].k == 0) {
        Rational expected(0);
        bool ok = true;
        for (std::size_t j = 0; j < rest.size(); ++j) {
          std::vector<Insertion> lower = rest;
          lower[j].k -= 1;
          auto v = lookup(g, lower);
          if (!v) {
            ok = false;
            break;
          }
          expected += *v;
        }
        if (ok) rep.record(expected == value, "string equation at g=" + std::to_string(g) + " n=" + std::to_string(n));
      } else {
        auto v = lookup(g, rest);
        if (v) rep.record(Rational(2 * g - 2 + (n - 1)) * *v == value,
                          "dilaton equation at g=" + std::to_string(g) + " n=" + std::to_string(n));
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Eynard-DOSS ingredients

using CMatrixSeries = std::vector<specrec_detail::CMatrix>;  // [p][j][i] = (R^{-1}_p)^j_i

struct DossIngredients {
  long order = 0;
  Cyclotomic C;
  std::vector<Cyclotomic> delta;     // Delta^i = dz/dzeta_i(0)
  std::vector<Cyclotomic> h;         // h^i = C Delta^i
  std::vector<CSeries> zeta;         // zeta_i(t), t = z - alpha_i
  CMatrixSeries rinv;                // canonical basis
  std::vector<std::vector<Cyclotomic>> translation;  // [p][i], coefficient of u^p
};

namespace specrec_detail {

inline Cyclotomic sqrt_sign_power(long k) { return (k % 2 == 0) ? Cyclotomic(1) : imaginary_unit(); }

inline Cyclotomic lambda_half_power(const Rational& lambda, long e) {
  // lambda^{e/2}
  if (e % 2 == 0) return Cyclotomic(rational_pow(lambda, e / 2));
  return sqrt_rational(lambda).pow(e);
}

/// dzeta_i/dz at alpha_i with the fixed determination of the square root.
inline Cyclotomic zeta_slope(const SpectralCurve& c, std::size_t i) {
  const long r = c.r;
  const long k = c.ram[i].label;
  if (c.family == CurveFamily::Hat) {
    return Cyclotomic(r) * lambda_half_power(c.lambda, r - 2) /
           (sqrt_sign_power(k) * sqrt_integer(2) * sine_value(k, r));
  }
  if (c.family == CurveFamily::Tilde) {
    // (theta^k lambda)^{(r-2)/2} with theta^{k/2} = exp(pi i k/(r-1))
    const Cyclotomic theta_half = root_of_unity(2 * (r - 1), k);
    return -imaginary_unit() * sqrt_integer(Integer(r * (r - 1))) * theta_half.pow(r - 2) *
           lambda_half_power(c.lambda, r - 2);
  }
  throw std::invalid_argument("Eynard-DOSS ingredients need a family curve");
}

}  // namespace specrec_detail

/// Canonical-basis R^{-1}(u) and T(u) through u^order by formal Laplace expansion at each critical point.
inline DossIngredients doss_ingredients(const SpectralCurve& c, const Cyclotomic& C, long order) {
  using namespace specrec_detail;
  if (c.family == CurveFamily::RAiry) throw std::invalid_argument("Eynard-DOSS ingredients need simple ramification");
  if (C.is_zero()) throw std::invalid_argument("global constant must be nonzero");
  const std::size_t N = c.ram.size();
  DossIngredients d;
  d.order = order;
  d.C = C;
  const long zprec = 2 * order + 6;
  std::vector<CSeries> tz;  // t as a series in zeta_i
  for (std::size_t i = 0; i < N; ++i) {
    const CSeries dx = centred_x(c, i);
    const Cyclotomic c2 = dx.coeff(2);
    const Cyclotomic slope = zeta_slope(c, i);
    if (slope * slope != Cyclotomic(-2) * c2) throw ConsistencyError("local coordinate slope does not square to -x''");
    const CSeries f = (c2.inverse() * dx.shift(-2)).truncate(zprec);
    const CSeries z = slope * f.sqrt_with_leading(Cyclotomic(1)).shift(1);
    // zeta^2 = -2 (x - x_i) as a check on the truncation
    if (!((z * z).truncate(zprec) == (Cyclotomic(-2) * dx).truncate(zprec)))
      throw ConsistencyError("local coordinate fails x - x_i = -zeta^2/2");
    d.zeta.push_back(z);
    tz.push_back(reversion(z, zprec));
    d.delta.push_back(tz.back().coeff(1));
    d.h.push_back(C * d.delta.back());
  }
  d.rinv.assign(static_cast<std::size_t>(order + 1), CMatrix(N, std::vector<Cyclotomic>(N, Cyclotomic(0))));
  for (std::size_t j = 0; j < N; ++j) {
    const CSeries& t = tz[j];
    const CSeries dt = t.derivative();
    for (std::size_t i = 0; i < N; ++i) {
      // dxi^i along the thimble at alpha_j: Delta^i t'(zeta) / (t + alpha_j - alpha_i)^2 dzeta
      const Cyclotomic shift = c.ram[j].alpha - c.ram[i].alpha;
      const CSeries base = (i == j) ? t : t + CSeries::constant(shift);
      const CSeries g = d.delta[i] * (dt * base.inverse(zprec).pow(2));
      const CSeries lap = formal_laplace(g);
      // R^{-1}(u)^j_i = -u FL[g]
      for (long p = 0; p <= order; ++p) d.rinv[static_cast<std::size_t>(p)][j][i] = -lap.coeff(p - 1);
    }
  }
  d.translation.assign(static_cast<std::size_t>(order + 1), std::vector<Cyclotomic>(N, Cyclotomic(0)));
  for (std::size_t i = 0; i < N; ++i) {
    const CSeries lap = formal_laplace(tz[i].derivative());
    for (long p = 1; p <= order; ++p) {
      Cyclotomic v = -C * lap.coeff(p - 1);
      if (p == 1) v += d.h[i];
      d.translation[static_cast<std::size_t>(p)][i] = v;
    }
  }
  return d;
}

/// Standard normalisation C = -i sqrt(r) lambda^{(r-2)/2}.
inline Cyclotomic standard_constant(const SpectralCurve& c) {
  return -imaginary_unit() * sqrt_integer(Integer(c.r)) * specrec_detail::lambda_half_power(c.lambda, c.r - 2);
}

/// Change of basis xi-hat^a = sum_i N[a][i] xi^i (xi^i = -Delta^i/(z - alpha_i)).
inline specrec_detail::CMatrix flat_change_of_basis(const SpectralCurve& c, const DossIngredients& d) {
  const XiBasis xb = xi_basis(c);
  const std::size_t N = c.ram.size();
  specrec_detail::CMatrix m(N, std::vector<Cyclotomic>(N));
  for (std::size_t a = 0; a < N; ++a) {
    const RationalFunction<Cyclotomic> f = convert<Cyclotomic>(xb.xi[a]);
    for (std::size_t i = 0; i < N; ++i) {
      const CSeries s = laurent_expand(f, c.ram[i].alpha, -1);
      m[a][i] = -s.coeff(-1) / d.delta[i];
    }
  }
  return m;
}

namespace specrec_detail {

inline CMatrix cmat_mul(const CMatrix& a, const CMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  CMatrix out(n, std::vector<Cyclotomic>(m, Cyclotomic(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l].is_zero()) continue;
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][l] * b[l][j];
    }
  return out;
}

inline CMatrix cmat_inverse(const CMatrix& m) {
  const std::size_t n = m.size();
  CMatrix identity(n, std::vector<Cyclotomic>(n, Cyclotomic(0)));
  for (std::size_t i = 0; i < n; ++i) identity[i][i] = Cyclotomic(1);
  auto [pivots, inv] = left_inverse(m, n);
  // left_inverse returns [basis][pivot]; the pivots are a permutation of all rows here.
  CMatrix out(n, std::vector<Cyclotomic>(n));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t q = 0; q < n; ++q) out[b][pivots[q]] = inv[b][q];
  return out;
}

}  // namespace specrec_detail

/// Which flat basis to express R^{-1} in: dual to xi-hat^a (the class with lambda in its TFT), or dual to
/// lambda^a xi-hat^a (the lambda-free TFT of the closed-form R-matrices).
enum class FlatNormalization { Weighted, ClosedForm };

/// R^{-1} in the flat basis, N R_C^{-1} N^{-1}, with rational entries enforced.
inline MatrixSeries flat_rinv(const SpectralCurve& c, const DossIngredients& d,
                              FlatNormalization norm = FlatNormalization::Weighted) {
  using namespace specrec_detail;
  CMatrix Nm = flat_change_of_basis(c, d);
  if (norm == FlatNormalization::ClosedForm)
    for (std::size_t a = 0; a < Nm.size(); ++a)
      for (auto& x : Nm[a]) x *= Cyclotomic(rational_pow(c.lambda, static_cast<long>(a)));
  const CMatrix Ninv = cmat_inverse(Nm);
  MatrixSeries out;
  for (const auto& rc : d.rinv) {
    const CMatrix f = cmat_mul(cmat_mul(Nm, rc), Ninv);
    RMatrixCoeff q(f.size(), std::vector<Rational>(f.size()));
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = 0; b < f.size(); ++b) q[a][b] = require_rational(f[a][b], "flat-basis R-matrix entry");
    out.coeffs.push_back(std::move(q));
  }
  return out;
}

/// T(u) = u(1 - R^{-1}(u)1) in the canonical basis with 1 = sum_i h^i e_i.
inline Report check_doss_translation(const DossIngredients& d) {
  Report rep;
  const std::size_t N = d.h.size();
  for (long p = 1; p <= d.order; ++p) {
    bool ok = true;
    for (std::size_t j = 0; j < N; ++j) {
      Cyclotomic expect = (p == 1) ? d.h[j] : Cyclotomic(0);
      for (std::size_t i = 0; i < N; ++i) expect -= d.rinv[static_cast<std::size_t>(p - 1)][j][i] * d.h[i];
      ok = ok && expect == d.translation[static_cast<std::size_t>(p)][j];
    }
    rep.record(ok, "T = u(1 - R^{-1}1) at order u^" + std::to_string(p));
  }
  return rep;
}

}  // namespace spinrec
