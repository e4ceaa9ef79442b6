#pragma once

#include <future>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "spinrec/specrec.hpp"

namespace spinrec {

/// An intersection number of a shifted class sampled at several lambda and interpolated as a polynomial in epsilon.
struct EpsilonFit {
  long r = 0;
  long g = 0;
  CurveFamily family = CurveFamily::Tilde;
  std::vector<Insertion> insertions;
  std::vector<Rational> lambdas;
  std::vector<Rational> values;
  long degree_bound = 0;
  std::vector<Rational> coeffs;  // coefficient of epsilon^m
  bool overdetermined_ok = false;

  Rational constant_term() const { return coeffs.empty() ? Rational(0) : coeffs[0]; }
};

/// epsilon as a power of lambda in each family.
inline long epsilon_lambda_power(CurveFamily family, long r) {
  if (family == CurveFamily::Hat) return 2;
  if (family == CurveFamily::Tilde) return r - 1;
  throw std::invalid_argument("epsilon is defined only for the hat and tilde families");
}

inline Rational epsilon_of(CurveFamily family, long r, const Rational& lambda) {
  return rational_pow(lambda, epsilon_lambda_power(family, r));
}

/// Largest epsilon power the shifted class can contribute to an entry: the shift raises the lambda weight
/// (r-2)(g-1) + |a| by r per unit of class degree, and epsilon carries the family's lambda power.
inline long epsilon_degree_bound(CurveFamily family, long r, long g, const std::vector<Insertion>& ins) {
  long weight = (r - 2) * (g - 1);
  for (const auto& x : ins) weight += x.a;
  const long step = epsilon_lambda_power(family, r);
  return weight <= 0 ? 0 : weight / step;
}

/// The single epsilon power allowed by homogeneity, or -1 when no power is allowed.
inline long epsilon_homogeneous_power(CurveFamily family, long r, long g, const std::vector<Insertion>& ins) {
  const long n = static_cast<long>(ins.size());
  long weight = (r - 2) * (g - 1);
  long psi = 0;
  for (const auto& x : ins) {
    weight += x.a;
    psi += x.k;
  }
  const long degree = moduli_dimension(g, n) - psi;
  const long lam = weight - r * degree;
  const long step = epsilon_lambda_power(family, r);
  if (lam < 0 || lam % step != 0) return -1;
  return lam / step;
}

inline std::vector<Rational> default_lambda_samples() {
  return {Rational(1), Rational(2), Rational(3), make_rational(1, 2), Rational(5)};
}

namespace limits_detail {

/// Exact interpolation through (x_i, y_i), returned as monomial coefficients.
inline std::vector<Rational> interpolate(const std::vector<Rational>& xs, const std::vector<Rational>& ys) {
  const std::size_t n = xs.size();
  std::vector<Rational> out(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    // Lagrange basis polynomial for node i.
    std::vector<Rational> basis{Rational(1)};
    Rational denom(1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<Rational> next(basis.size() + 1, Rational(0));
      for (std::size_t k = 0; k < basis.size(); ++k) {
        next[k + 1] += basis[k];
        next[k] -= basis[k] * xs[j];
      }
      basis = std::move(next);
      denom *= xs[i] - xs[j];
    }
    const Rational scale = ys[i] / denom;
    for (std::size_t k = 0; k < n; ++k) out[k] += basis[k] * scale;
  }
  return out;
}

inline Rational evaluate(const std::vector<Rational>& c, const Rational& x) {
  Rational acc(0);
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
  return acc;
}

/// Distinct-epsilon samples, in order.
inline std::vector<Rational> usable_samples(CurveFamily family, long r, const std::vector<Rational>& lambdas) {
  std::vector<Rational> out;
  std::set<Rational> seen;
  for (const auto& l : lambdas) {
    if (is_zero(l)) throw std::invalid_argument("lambda samples must be nonzero");
    if (seen.insert(epsilon_of(family, r, l)).second) out.push_back(l);
  }
  return out;
}

}  // namespace limits_detail

/// Fits sampled values of one entry as a polynomial in epsilon of degree at most the dimension bound,
/// and checks an extra sample against the fit.
inline EpsilonFit epsilon_poly_fit(CurveFamily family, long r, long g, const std::vector<Insertion>& ins,
                                   const std::vector<Rational>& lambda_samples,
                                   const std::function<Rational(const Rational&)>& value_at) {
  EpsilonFit fit;
  fit.r = r;
  fit.g = g;
  fit.family = family;
  fit.insertions = ins;
  fit.degree_bound = epsilon_degree_bound(family, r, g, ins);
  const std::vector<Rational> samples = limits_detail::usable_samples(family, r, lambda_samples);
  const std::size_t need = static_cast<std::size_t>(fit.degree_bound) + 2;
  if (samples.size() < need)
    throw std::invalid_argument("epsilon fit needs " + std::to_string(need) + " samples with distinct epsilon, got " +
                                std::to_string(samples.size()));
  fit.lambdas.assign(samples.begin(), samples.begin() + static_cast<long>(need));
  std::vector<Rational> xs;
  for (const auto& l : fit.lambdas) {
    fit.values.push_back(value_at(l));
    xs.push_back(epsilon_of(family, r, l));
  }
  const std::vector<Rational> fx(xs.begin(), xs.end() - 1), fy(fit.values.begin(), fit.values.end() - 1);
  fit.coeffs = limits_detail::interpolate(fx, fy);
  fit.overdetermined_ok = limits_detail::evaluate(fit.coeffs, xs.back()) == fit.values.back();
  if (!fit.overdetermined_ok)
    throw ConsistencyError("epsilon fit: the extra sample does not lie on the fitted polynomial");
  return fit;
}

/// Convenience overload sampling the family spectral-curve pipeline.
inline EpsilonFit epsilon_poly_fit(long r, long g, const std::vector<Insertion>& ins,
                                   const std::vector<Rational>& lambda_samples = default_lambda_samples(),
                                   CurveFamily family = CurveFamily::Tilde) {
  const long n = static_cast<long>(ins.size());
  return epsilon_poly_fit(family, r, g, ins, lambda_samples, [&](const Rational& l) {
    const IntersectionTable t = tr_intersections(build_curve(family, r, l), g, n);
    auto v = t.get(g, ins);
    return v ? *v : Rational(0);
  });
}

struct LimitEntry {
  long g = 0;
  std::vector<Insertion> insertions;
  std::vector<Rational> epsilon_poly;
  Rational rairy_value;
  bool match = false;
};

struct LimitReport {
  long r = 0;
  CurveFamily family = CurveFamily::Tilde;
  bool exploratory = false;
  std::vector<LimitEntry> entries;
  Report report;
};

/// (g, n) pairs with n >= 1 and 0 < 2g - 2 + n <= budget.
inline std::vector<std::pair<long, long>> stable_range(long budget) {
  std::vector<std::pair<long, long>> out;
  for (long g = 0; 2 * g - 1 <= budget; ++g)
    for (long n = 1; 2 * g - 2 + n <= budget; ++n)
      if (is_stable(g, n)) out.push_back({g, n});
  return out;
}

/// epsilon^0 coefficients of the family intersection numbers against the r-airy extraction. The hat family is
/// compared as well but marked exploratory. For r = 2 the Airy curve is compared with the DVV values.
inline LimitReport limit_check_pairs(long r, const std::vector<std::pair<long, long>>& pairs,
                                     CurveFamily family = CurveFamily::Tilde,
                                     const std::vector<Rational>& lambda_samples = default_lambda_samples()) {
  LimitReport out;
  out.r = r;
  out.family = family;
  out.exploratory = family == CurveFamily::Hat;
  if (r == 2) {
    const SpectralCurve airy = build_curve(CurveFamily::RAiry, 2);
    for (auto [g, n] : pairs) {
      for (const auto& [key, v] : tr_intersections(airy, g, n).entries) {
        std::vector<long> d;
        for (const auto& x : key.second) d.push_back(x.k);
        const Rational expect = dvv_intersection(g, d);
        out.entries.push_back({g, key.second, {v}, expect, v == expect});
        out.report.record(v == expect, "Airy anchor at g=" + std::to_string(g) + " n=" + std::to_string(n));
      }
    }
    return out;
  }
  const std::vector<Rational> samples = limits_detail::usable_samples(family, r, lambda_samples);
  const SpectralCurve rairy = build_curve(CurveFamily::RAiry, r);
  for (auto [g, n] : pairs) {
    // Each lambda sample is an independent job.
    std::vector<std::future<IntersectionTable>> jobs;
    for (const auto& l : samples)
      jobs.push_back(std::async(std::launch::async, [&, l, g = g, n = n] { return tr_intersections(build_curve(family, r, l), g, n); }));
    std::map<Rational, IntersectionTable> tables;
    for (std::size_t i = 0; i < samples.size(); ++i) tables.emplace(samples[i], jobs[i].get());
    const IntersectionTable base = tr_intersections(rairy, g, n);
    for (const auto& ins : insertion_multisets(r - 1, g, n)) {
      const EpsilonFit fit = epsilon_poly_fit(family, r, g, ins, samples, [&](const Rational& l) {
        auto v = tables.at(l).get(g, ins);
        return v ? *v : Rational(0);
      });
      const auto rv = base.get(g, ins);
      const Rational rairy_value = rv ? *rv : Rational(0);
      const bool ok = fit.constant_term() == rairy_value;
      out.entries.push_back({g, ins, fit.coeffs, rairy_value, ok});
      out.report.record(ok, "epsilon^0 coefficient vs r-airy at g=" + std::to_string(g) + " n=" + std::to_string(n));
      // Homogeneity: at most the one allowed epsilon power carries a nonzero coefficient.
      const long allowed = epsilon_homogeneous_power(family, r, g, ins);
      bool homogeneous = true;
      for (std::size_t m = 0; m < fit.coeffs.size(); ++m)
        if (!is_zero(fit.coeffs[m]) && static_cast<long>(m) != allowed) homogeneous = false;
      out.report.record(homogeneous, "epsilon-homogeneity at g=" + std::to_string(g) + " n=" + std::to_string(n));
    }
  }
  return out;
}

inline LimitReport limit_check(long r, long budget, CurveFamily family = CurveFamily::Tilde,
                               const std::vector<Rational>& lambda_samples = default_lambda_samples()) {
  return limit_check_pairs(r, stable_range(budget), family, lambda_samples);
}

}  // namespace spinrec
