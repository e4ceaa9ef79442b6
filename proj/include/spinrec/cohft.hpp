#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "spinrec/asymptotics.hpp"
#include "spinrec/report.hpp"
#include "spinrec/scalar.hpp"
#include "spinrec/symbolic.hpp"

namespace spinrec {

// ---------------------------------------------------------------------------------------------
// Dimension bookkeeping

/// Complex degree ((r-2)(g-1) + |a|)/r of the Witten class, when it is an integer.
inline std::optional<long> witten_dimension(long r, long g, const std::vector<long>& a) {
  if (r < 2) throw std::invalid_argument("witten_dimension requires r >= 2");
  long total = (r - 2) * (g - 1);
  for (long ai : a) {
    if (ai < 0 || ai > r - 2) throw std::invalid_argument("insertion index out of range");
    total += ai;
  }
  if (total % r != 0) return std::nullopt;
  return total / r;
}

inline long moduli_dimension(long g, long n) { return 3 * g - 3 + n; }
inline bool is_stable(long g, long n) { return 2 * g - 2 + n > 0; }

// ---------------------------------------------------------------------------------------------
// Witten-Kontsevich intersection numbers

namespace cohft_detail {

class DvvMemo {
 public:
  std::optional<Rational> find(const std::pair<long, std::vector<long>>& key) const {
    std::shared_lock lock(mu_);
    auto it = table_.find(key);
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }
  void insert(std::pair<long, std::vector<long>> key, const Rational& v) {
    std::unique_lock lock(mu_);
    table_.emplace(std::move(key), v);
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::pair<long, std::vector<long>>, Rational> table_;
};

inline DvvMemo& dvv_memo() {
  static DvvMemo memo;
  return memo;
}

inline Rational dfo(long k) { return Rational(double_factorial_odd(k)); }

}  // namespace cohft_detail

/// Integral of psi_1^{d_1} ... psi_n^{d_n} over the moduli space of stable genus-g curves.
/// Returns 0 off the dimension shell or for unstable (g, n).
inline Rational dvv_intersection(long g, std::vector<long> d) {
  const long n = static_cast<long>(d.size());
  if (g < 0 || !is_stable(g, n)) return Rational(0);
  long sum = 0;
  for (long x : d) {
    if (x < 0) return Rational(0);
    sum += x;
  }
  if (sum != moduli_dimension(g, n)) return Rational(0);
  std::sort(d.begin(), d.end());
  if (g == 0 && n == 3) return Rational(1);
  if (g == 1 && n == 1) return make_rational(1, 24);
  auto key = std::make_pair(g, d);
  if (auto hit = cohft_detail::dvv_memo().find(key)) return *hit;

  using cohft_detail::dfo;
  const long d1 = d.back();
  std::vector<long> rest(d.begin(), d.end() - 1);
  Rational acc(0);
  for (std::size_t j = 0; j < rest.size(); ++j) {
    const long dj = rest[j];
    if (d1 + dj - 1 < 0) continue;
    std::vector<long> next = rest;
    next[j] = d1 + dj - 1;
    acc += dfo(d1 + dj) / dfo(dj) * dvv_intersection(g, next);
  }
  Rational split(0);
  const std::size_t m = rest.size();
  for (long a = 0; a <= d1 - 2; ++a) {
    const long b = d1 - 2 - a;
    const Rational w = dfo(a + 1) * dfo(b + 1);
    std::vector<long> loop = rest;
    loop.push_back(a);
    loop.push_back(b);
    Rational inner = dvv_intersection(g - 1, loop);
    for (std::size_t mask = 0; mask < (std::size_t(1) << m); ++mask) {
      std::vector<long> left{a}, right{b};
      for (std::size_t i = 0; i < m; ++i) ((mask >> i) & 1 ? left : right).push_back(rest[i]);
      for (long g1 = 0; g1 <= g; ++g1) {
        const Rational l = dvv_intersection(g1, left);
        if (is_zero(l)) continue;
        inner += l * dvv_intersection(g - g1, right);
      }
    }
    split += w * inner;
  }
  acc += split / 2;
  const Rational out = acc / dfo(d1 + 1);
  cohft_detail::dvv_memo().insert(std::move(key), out);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Stable graphs

/// Connected stable graph with labelled legs; edges are stored as vertex pairs (u <= v).
/// `leaves[v]` holds the psi-powers of dilaton leaves at v, sorted, each >= 2.
struct StableGraph {
  std::vector<long> genus;
  std::vector<long> leg;
  std::vector<std::pair<long, long>> edges;
  std::vector<std::vector<long>> leaves;
  long automorphisms = 1;

  long vertex_count() const { return static_cast<long>(genus.size()); }
  long loops() const { return static_cast<long>(edges.size()) - vertex_count() + 1; }
  long total_genus() const { return std::accumulate(genus.begin(), genus.end(), 0L) + loops(); }
  /// Legs plus half-edges at v, excluding dilaton leaves.
  long valence(long v) const {
    long val = 0;
    for (long l : leg) val += (l == v);
    for (auto [a, b] : edges) val += (a == v) + (b == v);
    return val;
  }
};

namespace cohft_detail {

using GraphKey = std::tuple<std::vector<std::pair<long, std::vector<long>>>, std::vector<long>,
                            std::vector<std::pair<long, long>>>;

inline GraphKey relabel(const StableGraph& gr, const std::vector<long>& perm) {
  const std::size_t V = gr.genus.size();
  std::vector<std::pair<long, std::vector<long>>> labels(V);
  for (std::size_t v = 0; v < V; ++v) {
    labels[static_cast<std::size_t>(perm[v])] = {gr.genus[v], gr.leaves.empty() ? std::vector<long>{} : gr.leaves[v]};
  }
  std::vector<long> legs;
  for (long l : gr.leg) legs.push_back(perm[static_cast<std::size_t>(l)]);
  std::vector<std::pair<long, long>> edges;
  for (auto [a, b] : gr.edges) {
    long x = perm[static_cast<std::size_t>(a)], y = perm[static_cast<std::size_t>(b)];
    edges.emplace_back(std::min(x, y), std::max(x, y));
  }
  std::sort(edges.begin(), edges.end());
  return {labels, legs, edges};
}

inline StableGraph from_key(const GraphKey& key) {
  StableGraph out;
  for (const auto& [g, lv] : std::get<0>(key)) {
    out.genus.push_back(g);
    out.leaves.push_back(lv);
  }
  out.leg = std::get<1>(key);
  out.edges = std::get<2>(key);
  return out;
}

/// Canonical key and the number of vertex relabellings fixing the graph.
inline std::pair<GraphKey, long> canonical(const StableGraph& gr) {
  std::vector<long> perm(gr.genus.size());
  std::iota(perm.begin(), perm.end(), 0L);
  const GraphKey self = relabel(gr, perm);
  GraphKey best = self;
  long stabilizer = 0;
  do {
    GraphKey k = relabel(gr, perm);
    if (k == self) ++stabilizer;
    if (k < best) best = std::move(k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, stabilizer};
}

inline long automorphism_count(const StableGraph& gr) {
  long aut = canonical(gr).second;
  std::map<std::pair<long, long>, long> mult;
  for (auto e : gr.edges) ++mult[e];
  for (auto [e, k] : mult) {
    aut *= factorial(k).get_si();
    if (e.first == e.second) aut *= 1L << k;
  }
  for (const auto& lv : gr.leaves) {
    std::map<long, long> count;
    for (long p : lv) ++count[p];
    for (auto [p, k] : count) aut *= factorial(k).get_si();
  }
  return aut;
}

// Half-edge at a vertex: a leg index (kind 0) or an edge endpoint (kind 1, end 0 or 1).
struct HalfEdge {
  int kind;
  std::size_t index;
  int end;
};

inline std::vector<StableGraph> degenerations(const StableGraph& gr) {
  std::vector<StableGraph> out;
  const long V = gr.vertex_count();
  for (long v = 0; v < V; ++v) {
    const std::size_t vi = static_cast<std::size_t>(v);
    if (gr.genus[vi] >= 1) {
      StableGraph h = gr;
      h.genus[vi] -= 1;
      h.edges.emplace_back(v, v);
      out.push_back(std::move(h));
    }
    std::vector<HalfEdge> hs;
    for (std::size_t i = 0; i < gr.leg.size(); ++i)
      if (gr.leg[i] == v) hs.push_back({0, i, 0});
    for (std::size_t e = 0; e < gr.edges.size(); ++e) {
      if (gr.edges[e].first == v) hs.push_back({1, e, 0});
      if (gr.edges[e].second == v) hs.push_back({1, e, 1});
    }
    const std::size_t H = hs.size();
    for (std::size_t mask = 0; mask < (std::size_t(1) << H); ++mask) {
      const long nb = static_cast<long>(__builtin_popcountll(mask));
      const long na = static_cast<long>(H) - nb;
      for (long ga = 0; ga <= gr.genus[vi]; ++ga) {
        const long gb = gr.genus[vi] - ga;
        if (!is_stable(ga, na + 1) || !is_stable(gb, nb + 1)) continue;
        StableGraph h = gr;
        h.genus[vi] = ga;
        h.genus.push_back(gb);
        const long w = V;
        for (std::size_t k = 0; k < H; ++k) {
          if (!((mask >> k) & 1)) continue;
          const HalfEdge& he = hs[k];
          if (he.kind == 0) {
            h.leg[he.index] = w;
          } else {
            auto& e = h.edges[he.index];
            (he.end == 0 ? e.first : e.second) = w;
          }
        }
        for (auto& e : h.edges)
          if (e.first > e.second) std::swap(e.first, e.second);
        h.edges.emplace_back(v, w);
        out.push_back(std::move(h));
      }
    }
  }
  return out;
}

// Multisets of powers >= 2 at a vertex with the given dimension budget.
inline void leaf_multisets(long budget, long min_power, long max_count, std::vector<long>& cur,
                           std::vector<std::vector<long>>& out) {
  out.push_back(cur);
  if (max_count == 0) return;
  // Each added leaf raises the dimension by one and consumes p >= 2.
  for (long p = min_power; p <= budget + 1; ++p) {
    cur.push_back(p);
    leaf_multisets(budget + 1 - p, p, max_count - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace cohft_detail

/// All isomorphism classes of connected stable graphs of type (g, n), optionally decorated with up to
/// `max_dilaton` dilaton leaves in total (psi-powers >= 2, within each vertex's dimension budget).
inline std::vector<StableGraph> enumerate_stable_graphs(long g, long n, long max_dilaton = 0) {
  using namespace cohft_detail;
  if (!is_stable(g, n)) throw std::invalid_argument("enumerate_stable_graphs requires 2g - 2 + n > 0");
  StableGraph root;
  root.genus = {g};
  root.leg.assign(static_cast<std::size_t>(n), 0);
  root.leaves = {{}};
  std::map<GraphKey, StableGraph> seen;
  std::vector<StableGraph> frontier{root};
  seen.emplace(canonical(root).first, root);
  while (!frontier.empty()) {
    std::vector<StableGraph> next;
    for (const auto& gr : frontier)
      for (auto& h : degenerations(gr)) {
        h.leaves.assign(h.genus.size(), {});
        auto key = canonical(h).first;
        if (seen.count(key)) continue;
        seen.emplace(key, h);
        next.push_back(std::move(h));
      }
    frontier = std::move(next);
  }
  std::vector<StableGraph> out;
  for (const auto& [key, gr] : seen) {
    StableGraph base = from_key(key);
    if (max_dilaton == 0) {
      base.automorphisms = automorphism_count(base);
      out.push_back(std::move(base));
      continue;
    }
    // Decorate vertex by vertex, then deduplicate decorated graphs.
    std::vector<std::vector<std::vector<long>>> options(base.genus.size());
    for (std::size_t v = 0; v < base.genus.size(); ++v) {
      std::vector<long> cur;
      const long budget = moduli_dimension(base.genus[v], base.valence(static_cast<long>(v)));
      leaf_multisets(budget, 2, max_dilaton, cur, options[v]);
    }
    std::map<GraphKey, StableGraph> decorated;
    std::vector<std::size_t> pick(base.genus.size(), 0);
    while (true) {
      long total = 0;
      StableGraph d = base;
      for (std::size_t v = 0; v < pick.size(); ++v) {
        d.leaves[v] = options[v][pick[v]];
        total += static_cast<long>(d.leaves[v].size());
      }
      if (total <= max_dilaton) decorated.emplace(canonical(d).first, d);
      std::size_t v = 0;
      while (v < pick.size() && ++pick[v] == options[v].size()) pick[v++] = 0;
      if (v == pick.size()) break;
    }
    for (auto& [k, d] : decorated) {
      StableGraph c = from_key(k);
      c.automorphisms = automorphism_count(c);
      out.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Frobenius data, R-matrices and translations

using RMatrixCoeff = std::vector<std::vector<Rational>>;  // M[b][a] = (R^{-1}_p)^b_a

/// Flat basis v_0..v_{r-2}, pairing delta_{a+b,r-2}, unit v_0.
struct FrobeniusData {
  long r = 3;
  long dim() const { return r - 1; }
  Rational eta(long a, long b) const { return Rational(a + b == r - 2 ? 1 : 0); }
  long dual(long a) const { return r - 2 - a; }
  long unit() const { return 0; }
};

enum class Variant { Hat, Tilde, Limit, Custom };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Hat: return "hat";
    case Variant::Tilde: return "tilde";
    case Variant::Limit: return "limit";
    default: return "custom";
  }
}

inline RMatrixCoeff zero_matrix(long d) {
  return RMatrixCoeff(static_cast<std::size_t>(d), std::vector<Rational>(static_cast<std::size_t>(d), Rational(0)));
}
inline RMatrixCoeff identity_matrix(long d) {
  RMatrixCoeff m = zero_matrix(d);
  for (long i = 0; i < d; ++i) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
  return m;
}

inline RMatrixCoeff mat_mul(const RMatrixCoeff& a, const RMatrixCoeff& b) {
  const std::size_t n = a.size();
  RMatrixCoeff out = zero_matrix(static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (is_zero(a[i][k])) continue;
      for (std::size_t j = 0; j < n; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  return out;
}

inline RMatrixCoeff transpose(const RMatrixCoeff& a) {
  RMatrixCoeff out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a[j][i];
  return out;
}

/// Pairing matrix; it is its own inverse for the antidiagonal pairing.
inline RMatrixCoeff eta_matrix(const FrobeniusData& fd) {
  RMatrixCoeff m = zero_matrix(fd.dim());
  for (long a = 0; a < fd.dim(); ++a) m[static_cast<std::size_t>(a)][static_cast<std::size_t>(fd.dual(a))] = 1;
  return m;
}

/// Matrix power series sum_p M_p u^p, known for p <= order().
struct MatrixSeries {
  std::vector<RMatrixCoeff> coeffs;
  long order() const { return static_cast<long>(coeffs.size()) - 1; }
  long dim() const { return coeffs.empty() ? 0 : static_cast<long>(coeffs[0].size()); }
  Series<Rational> entry(long b, long a) const {
    std::vector<Rational> c;
    for (const auto& m : coeffs) c.push_back(m[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]);
    return Series<Rational>(0, std::move(c), order() + 1);
  }
};

/// Multiplicative inverse of a matrix series with identity constant term.
inline MatrixSeries inverse(const MatrixSeries& s) {
  const long d = s.dim();
  if (s.coeffs.empty() || s.coeffs[0] != identity_matrix(d))
    throw std::invalid_argument("matrix series inverse requires identity constant term");
  MatrixSeries out;
  out.coeffs.push_back(identity_matrix(d));
  for (long p = 1; p <= s.order(); ++p) {
    RMatrixCoeff acc = zero_matrix(d);
    for (long j = 1; j <= p; ++j) {
      RMatrixCoeff t = mat_mul(s.coeffs[static_cast<std::size_t>(j)], out.coeffs[static_cast<std::size_t>(p - j)]);
      for (long i = 0; i < d; ++i)
        for (long k = 0; k < d; ++k) acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] -= t[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    out.coeffs.push_back(std::move(acc));
  }
  return out;
}

/// Vector-valued series T(u) = sum_{d >= 1} T_d u^{d+1}; coeffs[d] holds T_d (coeffs[0] unused, zero).
struct Translation {
  std::vector<std::vector<Rational>> coeffs;
  long order() const { return static_cast<long>(coeffs.size()) - 1; }
  bool is_zero() const {
    for (const auto& c : coeffs)
      for (const auto& x : c)
        if (!spinrec::is_zero(x)) return false;
    return true;
  }
  /// Coefficient of u^e along v_b.
  Rational at_power(long e, long b) const {
    const long d = e - 1;
    if (d < 1 || d > order()) return Rational(0);
    return coeffs[static_cast<std::size_t>(d)][static_cast<std::size_t>(b)];
  }
};

/// For a matrix series M(u): (u(M(u)1 - 1), u(1 - M(u)1)).
inline std::pair<Translation, Translation> unit_translations(const MatrixSeries& rinv, long unit) {
  const long d = rinv.dim();
  Translation tl, tr;
  tl.coeffs.assign(static_cast<std::size_t>(rinv.order() + 1), std::vector<Rational>(static_cast<std::size_t>(d), Rational(0)));
  tr = tl;
  for (long p = 1; p <= rinv.order(); ++p)
    for (long b = 0; b < d; ++b) {
      const Rational c = rinv.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)][static_cast<std::size_t>(unit)];
      tl.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)] = c;
      tr.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)] = -c;
    }
  return {tl, tr};
}

/// TFT evaluator: genus and flat-basis insertion indices to a rational number.
using TftFunction = std::function<Rational(long, const std::vector<long>&)>;

/// Givental-side input: Frobenius data, TFT, R^{-1}(u) and the translation used before the R action.
struct CohftSpec {
  FrobeniusData frobenius;
  Variant variant = Variant::Custom;
  Rational lambda = 1;
  TftFunction tft;
  MatrixSeries rinv;
  Translation translation;
  long order() const { return rinv.order(); }
};

inline Rational hat_tft(long r, const Rational& lambda, long g, const std::vector<long>& a) {
  const long n = static_cast<long>(a.size());
  if (!is_stable(g, n)) throw std::invalid_argument("TFT requires a stable (g, n)");
  long abs_a = 0;
  for (long x : a) abs_a += x;
  Cyclotomic sum(0);
  for (long k = 1; k <= r - 1; ++k) {
    Cyclotomic term = ((k - 1) * (g - 1)) % 2 == 0 ? Cyclotomic(1) : Cyclotomic(-1);
    for (long x : a) term *= sine_value((x + 1) * k, r);
    term /= sine_value(k, r).pow(2 * g - 2 + n);
    sum += term;
  }
  const Rational value = require_rational(sum, "hat TFT sine sum");
  return value * rational_pow(make_rational(r, 2), g - 1) * rational_pow(lambda, (r - 2) * (g - 1) + abs_a);
}

inline Rational tilde_tft(long r, const Rational& lambda, long g, const std::vector<long>& a) {
  long abs_a = 0;
  for (long x : a) abs_a += x;
  const long m = r - 1;
  if ((((g - 1 - abs_a) % m) + m) % m != 0) return Rational(0);
  return rational_pow(Rational(r - 1), g) * rational_pow(lambda, (g - 1) * (r - 2) + abs_a);
}

namespace cohft_detail {

inline TftFunction memoized(TftFunction f) {
  struct Cache {
    std::mutex mu;
    std::map<std::pair<long, std::vector<long>>, Rational> table;
  };
  auto cache = std::make_shared<Cache>();
  return [f = std::move(f), cache](long g, const std::vector<long>& a) {
    std::vector<long> key = a;
    std::sort(key.begin(), key.end());
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->table.find({g, key});
      if (it != cache->table.end()) return it->second;
    }
    Rational v = f(g, key);
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->table.emplace(std::make_pair(g, key), v);
    return v;
  };
}

}  // namespace cohft_detail

/// Flat-basis R^{-1} of the hat family in the normalization where the TFT carries no lambda:
/// B^even_{r,a}(u/lambda^r) on the diagonal and B^odd_{r,a}(u/lambda^r) on the antidiagonal.
inline MatrixSeries hat_closed_form_rinv(long r, const Rational& lambda, long order) {
  const long d = r - 1;
  MatrixSeries m;
  m.coeffs.assign(static_cast<std::size_t>(order + 1), zero_matrix(d));
  const Rational scale = rational_pow(lambda, -r);
  for (long a = 0; a < d; ++a) {
    const BSeries b = b_series(r, a, order);
    for (long p = 0; p <= order; ++p) {
      const long row = (p % 2 == 0) ? a : r - 2 - a;
      m.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(row)][static_cast<std::size_t>(a)] +=
          b.b[static_cast<std::size_t>(p)] * rational_pow(scale, p);
    }
  }
  return m;
}

/// Flat-basis R^{-1} of the tilde family, same normalization: (R^{-1}_m)^b_a = P_m(r,a) (r(r-1)lambda^r)^{-m}
/// for b + m = a mod r - 1.
inline MatrixSeries tilde_closed_form_rinv(long r, const Rational& lambda, long order) {
  const long d = r - 1;
  MatrixSeries m;
  m.coeffs.assign(static_cast<std::size_t>(order + 1), zero_matrix(d));
  const PTable table = p_table(r, order);
  const Rational scale = Rational(1) / (Rational(r * (r - 1)) * rational_pow(lambda, r));
  for (long a = 0; a < d; ++a)
    for (long p = 0; p <= order; ++p) {
      const long b = (((a - p) % d) + d) % d;
      m.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
          table.at(p, a) * rational_pow(scale, p);
    }
  return m;
}

/// Conjugation by diag(lambda^a): entry (b, a) picks up lambda^{a-b}.
inline MatrixSeries lambda_conjugate(MatrixSeries m, const Rational& lambda) {
  for (auto& c : m.coeffs)
    for (std::size_t b = 0; b < c.size(); ++b)
      for (std::size_t a = 0; a < c[b].size(); ++a)
        if (!is_zero(c[b][a])) c[b][a] *= rational_pow(lambda, static_cast<long>(a) - static_cast<long>(b));
  return m;
}

/// Shift along v_{r-2}: epsilon = lambda^2. The TFT carries lambda^{|a|}, so the R-matrix is the
/// closed form conjugated by diag(lambda^a).
inline CohftSpec hat_spec(long r, const Rational& lambda, long order = 10) {
  if (r < 2) throw std::invalid_argument("hat_spec requires r >= 2");
  if (is_zero(lambda)) throw std::invalid_argument("lambda must be nonzero");
  CohftSpec spec;
  spec.frobenius.r = r;
  spec.variant = Variant::Hat;
  spec.lambda = lambda;
  spec.tft = cohft_detail::memoized([r, lambda](long g, const std::vector<long>& a) { return hat_tft(r, lambda, g, a); });
  spec.rinv = lambda_conjugate(hat_closed_form_rinv(r, lambda, order), lambda);
  spec.translation = unit_translations(spec.rinv, 0).second;
  return spec;
}

/// Shift along v_1: epsilon = lambda^{r-1}.
inline CohftSpec tilde_spec(long r, const Rational& lambda, long order = 10) {
  if (r < 3) throw std::invalid_argument("tilde_spec requires r >= 3");
  if (is_zero(lambda)) throw std::invalid_argument("lambda must be nonzero");
  CohftSpec spec;
  spec.frobenius.r = r;
  spec.variant = Variant::Tilde;
  spec.lambda = lambda;
  spec.tft = cohft_detail::memoized([r, lambda](long g, const std::vector<long>& a) { return tilde_tft(r, lambda, g, a); });
  spec.rinv = lambda_conjugate(tilde_closed_form_rinv(r, lambda, order), lambda);
  spec.translation = unit_translations(spec.rinv, 0).second;
  return spec;
}

/// Trivial action on a TFT (R = Id, T = 0).
inline CohftSpec trivial_spec(long r, TftFunction tft, long order = 10) {
  CohftSpec spec;
  spec.frobenius.r = r;
  spec.tft = cohft_detail::memoized(std::move(tft));
  spec.rinv.coeffs.assign(static_cast<std::size_t>(order + 1), zero_matrix(r - 1));
  spec.rinv.coeffs[0] = identity_matrix(r - 1);
  spec.translation.coeffs.assign(static_cast<std::size_t>(order + 1), std::vector<Rational>(static_cast<std::size_t>(r - 1), Rational(0)));
  return spec;
}

/// R(u) R^dagger(-u) = Id coefficientwise up to the given order, with R^dagger = eta^{-1} R^T eta.
inline Report check_symplectic(const MatrixSeries& rinv, const FrobeniusData& fd, long order) {
  Report rep;
  if (rinv.order() < order) throw std::invalid_argument("symplectic check beyond known order");
  const MatrixSeries R = inverse(rinv);
  const RMatrixCoeff eta = eta_matrix(fd);
  for (long N = 0; N <= order; ++N) {
    RMatrixCoeff acc = zero_matrix(fd.dim());
    for (long p = 0; p <= N; ++p) {
      const long q = N - p;
      RMatrixCoeff t = mat_mul(mat_mul(R.coeffs[static_cast<std::size_t>(p)], eta),
                               mat_mul(transpose(R.coeffs[static_cast<std::size_t>(q)]), eta));
      const Rational sign = (q % 2 == 0) ? Rational(1) : Rational(-1);
      for (long i = 0; i < fd.dim(); ++i)
        for (long j = 0; j < fd.dim(); ++j) acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += sign * t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    rep.record(acc == (N == 0 ? identity_matrix(fd.dim()) : zero_matrix(fd.dim())),
               "R(u)R^dagger(-u) = Id at order u^" + std::to_string(N));
  }
  return rep;
}

/// Coefficients E[p][q] (bivector, E[p][q][b][c]) of (eta^{-1} - R^{-1}(u) eta^{-1} R^{-1}(v)^T)/(u+v)
/// for p + q <= max_degree. Throws ConsistencyError when the numerator is not divisible by u + v.
struct EdgeSeries {
  std::vector<std::vector<RMatrixCoeff>> coeffs;
  const RMatrixCoeff& at(long p, long q) const { return coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)]; }
  long max_degree() const { return static_cast<long>(coeffs.size()) - 1; }
};

inline EdgeSeries edge_series(const MatrixSeries& rinv, const FrobeniusData& fd, long max_degree) {
  if (rinv.order() < max_degree + 1) throw std::invalid_argument("edge series needs R^{-1} one order beyond its degree");
  const long d = fd.dim();
  const RMatrixCoeff eta_inv = eta_matrix(fd);
  const long top = max_degree + 1;
  auto numerator = [&](long p, long q) {
    RMatrixCoeff m = mat_mul(mat_mul(rinv.coeffs[static_cast<std::size_t>(p)], eta_inv), transpose(rinv.coeffs[static_cast<std::size_t>(q)]));
    for (auto& row : m)
      for (auto& x : row) x = -x;
    if (p == 0 && q == 0)
      for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += eta_inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
  };
  EdgeSeries out;
  out.coeffs.assign(static_cast<std::size_t>(max_degree + 1), std::vector<RMatrixCoeff>(static_cast<std::size_t>(max_degree + 1), zero_matrix(d)));
  if (numerator(0, 0) != zero_matrix(d)) throw ConsistencyError("edge numerator has a constant term; R^{-1}(0) != Id");
  for (long D = 1; D <= top; ++D) {
    // n_{p+1,q} = e_{p,q} + e_{p+1,q-1}
    for (long q = 0; q <= D - 1; ++q) {
      const long p = D - 1 - q;
      RMatrixCoeff e = numerator(p + 1, q);
      if (q >= 1) {
        const RMatrixCoeff& prev = out.coeffs[static_cast<std::size_t>(p + 1)][static_cast<std::size_t>(q - 1)];
        for (long i = 0; i < d; ++i)
          for (long j = 0; j < d; ++j) e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= prev[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      if (p <= max_degree && q <= max_degree) out.coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = e;
    }
    const RMatrixCoeff rem = numerator(0, D);
    if (rem != out.coeffs[0][static_cast<std::size_t>(D - 1)])
      throw ConsistencyError("edge series not divisible by (u+v) at degree " + std::to_string(D) +
                             ": R-matrix violates the symplectic condition");
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Correlators

/// Insertion tau_k(v_a).
struct Insertion {
  long a = 0;
  long k = 0;
  friend bool operator<(const Insertion& x, const Insertion& y) { return std::tie(x.a, x.k) < std::tie(y.a, y.k); }
  friend bool operator==(const Insertion& x, const Insertion& y) { return x.a == y.a && x.k == y.k; }
};

namespace cohft_detail {

using VertexKey = std::pair<long, std::vector<std::pair<long, long>>>;  // (genus, sorted (basis, psi))

class GraphSum {
 public:
  GraphSum(const CohftSpec& spec, const Translation* translation, long max_degree)
      : spec_(spec), translation_(translation), d_(spec.frobenius.dim()) {
    edges_ = edge_series(spec.rinv, spec.frobenius, max_degree);
  }

  Rational correlator(long g, const std::vector<Insertion>& ins) {
    const long n = static_cast<long>(ins.size());
    const auto graphs = graph_cache(g, n);
    const std::size_t workers =
        std::min<std::size_t>(graphs.size(), std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1 || graphs.size() < 4) {
      Rational total(0);
      for (const auto& gr : graphs) total += graph_value(gr, ins);
      return total;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<Rational>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&] {
        Rational part(0);
        for (std::size_t i = next++; i < graphs.size(); i = next++) part += graph_value(graphs[i], ins);
        return part;
      }));
    Rational total(0);
    for (auto& j : jobs) total += j.get();
    return total;
  }

 private:
  static std::vector<StableGraph> graph_cache(long g, long n) {
    static std::mutex mu;
    static std::map<std::pair<long, long>, std::vector<StableGraph>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({g, n});
    if (it != cache.end()) return it->second;
    auto graphs = enumerate_stable_graphs(g, n);
    cache.emplace(std::make_pair(g, n), graphs);
    return graphs;
  }

  struct State {
    std::vector<std::vector<std::pair<long, long>>> half;  // per vertex (basis, psi)
    std::vector<long> used;                                 // psi budget used per vertex
    std::vector<long> budget;
  };

  Rational graph_value(const StableGraph& gr, const std::vector<Insertion>& ins) {
    State st;
    const std::size_t V = gr.genus.size();
    st.half.resize(V);
    st.used.assign(V, 0);
    for (std::size_t v = 0; v < V; ++v)
      st.budget.push_back(moduli_dimension(gr.genus[v], gr.valence(static_cast<long>(v))));
    for (std::size_t i = 0; i < ins.size(); ++i) {
      st.used[static_cast<std::size_t>(gr.leg[i])] += ins[i].k;
    }
    for (std::size_t v = 0; v < V; ++v)
      if (st.used[v] > st.budget[v]) return Rational(0);
    Rational acc(0);
    legs(gr, ins, 0, Rational(1), st, acc);
    return acc / Rational(gr.automorphisms);
  }

  void legs(const StableGraph& gr, const std::vector<Insertion>& ins, std::size_t i, const Rational& coef, State& st,
            Rational& acc) {
    if (i == ins.size()) {
      edges(gr, 0, coef, st, acc);
      return;
    }
    const std::size_t v = static_cast<std::size_t>(gr.leg[i]);
    for (long p = 0; st.used[v] + p <= st.budget[v]; ++p) {
      if (p > spec_.rinv.order()) throw std::invalid_argument("R-matrix truncation too low for this correlator");
      const auto& m = spec_.rinv.coeffs[static_cast<std::size_t>(p)];
      for (long b = 0; b < d_; ++b) {
        const Rational& c = m[static_cast<std::size_t>(b)][static_cast<std::size_t>(ins[i].a)];
        if (is_zero(c)) continue;
        st.used[v] += p;
        st.half[v].emplace_back(b, ins[i].k + p);
        legs(gr, ins, i + 1, coef * c, st, acc);
        st.half[v].pop_back();
        st.used[v] -= p;
      }
    }
  }

  void edges(const StableGraph& gr, std::size_t e, const Rational& coef, State& st, Rational& acc) {
    if (e == gr.edges.size()) {
      Rational prod = coef;
      for (std::size_t v = 0; v < gr.genus.size() && !is_zero(prod); ++v) prod *= vertex(gr.genus[v], st.half[v]);
      acc += prod;
      return;
    }
    const std::size_t u = static_cast<std::size_t>(gr.edges[e].first), w = static_cast<std::size_t>(gr.edges[e].second);
    for (long p = 0; st.used[u] + p <= st.budget[u]; ++p) {
      st.used[u] += p;
      for (long q = 0; st.used[w] + q <= st.budget[w]; ++q) {
        if (p + q > edges_.max_degree()) throw std::invalid_argument("edge series truncation too low");
        const RMatrixCoeff& m = edges_.at(p, q);
        st.used[w] += q;
        for (long b = 0; b < d_; ++b)
          for (long c = 0; c < d_; ++c) {
            const Rational& x = m[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
            if (is_zero(x)) continue;
            st.half[u].emplace_back(b, p);
            st.half[w].emplace_back(c, q);
            edges(gr, e + 1, coef * x, st, acc);
            st.half[w].pop_back();
            st.half[u].pop_back();
          }
        st.used[w] -= q;
      }
      st.used[u] -= p;
    }
  }

  // TFT value times psi-intersection, summed over dilaton leaves with weight 1/m!.
  Rational vertex(long g, std::vector<std::pair<long, long>> half) {
    std::sort(half.begin(), half.end());
    VertexKey key{g, half};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const long n = static_cast<long>(half.size());
    std::vector<long> basis, psi;
    long used = 0;
    for (auto [b, k] : half) {
      basis.push_back(b);
      psi.push_back(k);
      used += k;
    }
    Rational total(0);
    const long max_leaves = translation_ ? moduli_dimension(g, n) - used : 0;
    for (long m = 0; m <= std::max(0L, max_leaves); ++m) {
      // Leaf psi-powers sum to dim - used where dim grows with m.
      const long need = moduli_dimension(g, n + m) - used;
      if (need < 2 * m || (m == 0 && need != 0)) continue;
      Rational sum_m(0);
      std::vector<long> powers(static_cast<std::size_t>(m), 2);
      leaf_powers(g, basis, psi, powers, 0, need, Rational(1), sum_m);
      total += sum_m / Rational(factorial(m));
    }
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(std::move(key), total);
    return total;
  }

  // Enumerates ordered leaf power tuples (each >= 2, summing to need), then leaf basis vectors.
  void leaf_powers(long g, const std::vector<long>& basis, const std::vector<long>& psi, std::vector<long>& powers,
                   std::size_t j, long need, const Rational& coef, Rational& acc) {
    if (j == powers.size()) {
      if (need != 0) return;
      leaf_basis(g, basis, psi, powers, 0, std::vector<long>{}, coef, acc);
      return;
    }
    const long remaining_min = 2 * static_cast<long>(powers.size() - j - 1);
    for (long p = 2; p <= need - remaining_min; ++p) {
      powers[j] = p;
      leaf_powers(g, basis, psi, powers, j + 1, need - p, coef, acc);
    }
  }

  void leaf_basis(long g, const std::vector<long>& basis, const std::vector<long>& psi, const std::vector<long>& powers,
                  std::size_t j, std::vector<long> chosen, const Rational& coef, Rational& acc) {
    if (j == powers.size()) {
      std::vector<long> all_basis = basis, all_psi = psi;
      all_basis.insert(all_basis.end(), chosen.begin(), chosen.end());
      all_psi.insert(all_psi.end(), powers.begin(), powers.end());
      const Rational psi_int = dvv_intersection(g, all_psi);
      if (is_zero(psi_int)) return;
      acc += coef * psi_int * spec_.tft(g, all_basis);
      return;
    }
    for (long c = 0; c < d_; ++c) {
      const Rational t = translation_->at_power(powers[j], c);
      if (is_zero(t)) continue;
      chosen.push_back(c);
      leaf_basis(g, basis, psi, powers, j + 1, chosen, coef * t, acc);
      chosen.pop_back();
    }
  }

  const CohftSpec& spec_;
  const Translation* translation_;
  long d_;
  EdgeSeries edges_;
  std::mutex mu_;
  std::map<VertexKey, Rational> memo_;
};

inline void check_insertions(const CohftSpec& spec, long g, const std::vector<Insertion>& ins) {
  if (!is_stable(g, static_cast<long>(ins.size()))) throw std::invalid_argument("correlator requires 2g - 2 + n > 0");
  for (const auto& x : ins) {
    if (x.a < 0 || x.a >= spec.frobenius.dim()) throw std::invalid_argument("insertion index out of range");
    if (x.k < 0) throw std::invalid_argument("negative psi power");
  }
}

inline long psi_total(const std::vector<Insertion>& ins) {
  long s = 0;
  for (const auto& x : ins) s += x.k;
  return s;
}

}  // namespace cohft_detail

/// Integral of (R T w)_{g,n}(v_{a_1}, ..., v_{a_n}) psi_1^{k_1} ... psi_n^{k_n}, with T the spec's translation.
inline Rational givental_correlator(const CohftSpec& spec, long g, const std::vector<Insertion>& ins) {
  cohft_detail::check_insertions(spec, g, ins);
  const long D = moduli_dimension(g, static_cast<long>(ins.size()));
  if (cohft_detail::psi_total(ins) > D) return Rational(0);
  cohft_detail::GraphSum sum(spec, &spec.translation, D);
  return sum.correlator(g, ins);
}

/// The same correlator computed in the other order: R acts on w first, then the translation
/// T_L = u(R(u)1 - 1) is applied to the result.
inline Rational givental_correlator_translate_after(const CohftSpec& spec, long g, const std::vector<Insertion>& ins) {
  cohft_detail::check_insertions(spec, g, ins);
  const long n = static_cast<long>(ins.size());
  const long D = moduli_dimension(g, n);
  const long used = cohft_detail::psi_total(ins);
  if (used > D) return Rational(0);
  const Translation tl = unit_translations(inverse(spec.rinv), spec.frobenius.unit()).first;
  cohft_detail::GraphSum pure(spec, nullptr, D + (D - used));
  const long d = spec.frobenius.dim();
  Rational total(0);
  for (long m = 0; m <= D - used; ++m) {
    // The extra psi-powers only need to fit within the dimension, since R w has classes of every degree.
    const long room = moduli_dimension(g, n + m) - used;
    Rational sum_m(0);
    // Ordered tuples of (power >= 2, basis) for the extra marked points.
    std::vector<Insertion> extra(static_cast<std::size_t>(m));
    std::function<void(std::size_t, long, Rational)> rec = [&](std::size_t j, long left, Rational coef) {
      if (j == extra.size()) {
        std::vector<Insertion> all = ins;
        all.insert(all.end(), extra.begin(), extra.end());
        sum_m += coef * pure.correlator(g, all);
        return;
      }
      const long rest_min = 2 * static_cast<long>(extra.size() - j - 1);
      for (long p = 2; p <= left - rest_min; ++p)
        for (long c = 0; c < d; ++c) {
          const Rational t = tl.at_power(p, c);
          if (is_zero(t)) continue;
          extra[j] = {c, p};
          rec(j + 1, left - p, coef * t);
        }
    };
    rec(0, room, Rational(1));
    total += sum_m / Rational(factorial(m));
  }
  return total;
}

/// v_a . v_b = sum_c Omega_{0,3}(v_a, v_b, v_c) v_{c^dual}.
inline std::vector<Rational> quantum_product(const CohftSpec& spec, long a, long b) {
  const long d = spec.frobenius.dim();
  std::vector<Rational> out(static_cast<std::size_t>(d), Rational(0));
  for (long c = 0; c < d; ++c)
    out[static_cast<std::size_t>(spec.frobenius.dual(c))] = givental_correlator(spec, 0, {{a, 0}, {b, 0}, {c, 0}});
  return out;
}

// ---------------------------------------------------------------------------------------------
// Intersection tables

/// Map from (g, sorted insertions) to exact values.
struct IntersectionTable {
  long r = 2;
  Variant variant = Variant::Custom;
  Rational lambda = 1;
  using Key = std::pair<long, std::vector<Insertion>>;
  std::map<Key, Rational> entries;

  static Key key(long g, std::vector<Insertion> ins) {
    std::sort(ins.begin(), ins.end());
    return {g, std::move(ins)};
  }
  void set(long g, const std::vector<Insertion>& ins, const Rational& v) { entries[key(g, ins)] = v; }
  std::optional<Rational> get(long g, const std::vector<Insertion>& ins) const {
    auto it = entries.find(key(g, ins));
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }
};

/// All insertion multisets for (g, n) with a_i in 0..dim-1 and total psi-power at most 3g - 3 + n.
inline std::vector<std::vector<Insertion>> insertion_multisets(long dim, long g, long n) {
  std::vector<std::vector<Insertion>> out;
  const long D = moduli_dimension(g, n);
  std::vector<Insertion> cur;
  std::function<void(long, Insertion, long)> rec = [&](long left, Insertion minimum, long budget) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (long a = minimum.a; a < dim; ++a)
      for (long k = (a == minimum.a ? minimum.k : 0); k <= budget; ++k) {
        cur.push_back({a, k});
        rec(left - 1, {a, k}, budget - k);
        cur.pop_back();
      }
  };
  rec(n, {0, 0}, D);
  return out;
}

/// Givental-side table of every insertion multiset of type (g, n).
inline IntersectionTable givental_table(const CohftSpec& spec, long g, long n) {
  IntersectionTable t;
  t.r = spec.frobenius.r;
  t.variant = spec.variant;
  t.lambda = spec.lambda;
  for (const auto& ins : insertion_multisets(spec.frobenius.dim(), g, n)) t.set(g, ins, givental_correlator(spec, g, ins));
  return t;
}

}  // namespace spinrec
