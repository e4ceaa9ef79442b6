#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "spinrec/asymptotics.hpp"
#include "spinrec/io.hpp"
#include "spinrec/limits.hpp"
#include "spinrec/lucas.hpp"

using namespace spinrec;

namespace {

struct Output {
  std::string format = "json";
  bool pretty = false;
};

void emit(const Json& doc, const Output& out) {
  if (out.format == "csv") {
    std::cout << rows_to_csv(doc);
  } else {
    std::cout << (out.pretty ? doc.dump(2) : doc.dump()) << "\n";
  }
}

Json insertion_json(const std::vector<Insertion>& ins, long g) {
  Json a = Json::array(), k = Json::array();
  for (const auto& x : ins) {
    a.push_back(x.a);
    k.push_back(x.k);
  }
  return Json{{"g", g}, {"a", a}, {"k", k}};
}

std::vector<Rational> parse_samples(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_rational(item));
  return out;
}

/// Loads a cached document or computes and stores it.
Json cached(const std::string& pipeline, const Json& params, bool use_cache, const std::function<Json()>& compute) {
  if (!use_cache) return compute();
  const ResultCache cache = ResultCache::from_environment();
  const std::string key = ResultCache::key(pipeline, params);
  if (auto hit = cache.load(key)) return Json::parse(*hit);
  Json doc = compute();
  cache.store(key, doc.dump());
  return doc;
}

int exit_for(const Report& rep) {
  if (!rep.passed()) std::cerr << "spinrec: " << rep.summary() << "\n";
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact spin intersection numbers by topological recursion and Givental reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  bool no_cache = false;
  app.add_option("--out", out.format, "Output format for tr and intersect")->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--pretty", out.pretty, "Indent JSON output");
  app.add_flag("--no-cache", no_cache, "Skip the SPINREC_CACHE result cache");

  // lucas
  auto* lucas = app.add_subcommand("lucas", "Lucas polynomial coefficients or identity checks");
  std::string kind = "u";
  long lucas_n = 0, identities = -1;
  lucas->add_option("--kind", kind, "u or v")->check(CLI::IsMember({"u", "v"}));
  lucas->add_option("--n", lucas_n, "Index n")->required()->check(CLI::NonNegativeNumber);
  lucas->add_option("--identities", identities, "Verify the Lucas identity suite up to this index instead");

  // series
  auto* series = app.add_subcommand("series", "Exact coefficient lists of the B-series and P-table");
  series->require_subcommand(1);
  auto* series_b = series->add_subcommand("b", "Coefficients of B_{r,a}");
  auto* series_p = series->add_subcommand("p", "Polynomials P_m(r,a) as an m x a table");
  long sr = 3, sa = 0, sorder = 4;
  series_b->add_option("--r", sr)->required();
  series_b->add_option("--a", sa)->required();
  series_b->add_option("--order", sorder)->required();
  series_p->add_option("--r", sr)->required();
  series_p->add_option("--order", sorder)->required();

  // tr / intersect share curve options
  std::string curve = "r-airy";
  long r = 2, g = 0, n = 3;
  std::string lambda_text = "1";
  auto add_curve = [&](CLI::App* c) {
    c->add_option("--curve", curve, "hat, tilde or r-airy")->required()->check(CLI::IsMember({"hat", "tilde", "r-airy"}));
    c->add_option("--r", r)->required();
    c->add_option("--lambda", lambda_text, "Rational shift parameter P/Q");
    c->add_option("--g", g)->required();
    c->add_option("--n", n)->required();
  };
  auto* tr = app.add_subcommand("tr", "Correlator dump in the elementary pole basis");
  add_curve(tr);
  auto* intersect = app.add_subcommand("intersect", "Intersection numbers extracted from the correlators");
  add_curve(intersect);

  // crosscheck
  auto* crosscheck = app.add_subcommand("crosscheck", "Givental graph sum against topological recursion");
  std::string family = "tilde";
  long budget = 2;
  crosscheck->add_option("--r", r)->required();
  crosscheck->add_option("--family", family)->required()->check(CLI::IsMember({"hat", "tilde"}));
  crosscheck->add_option("--lambda", lambda_text)->required();
  crosscheck->add_option("--budget", budget, "Largest 2g - 2 + n")->required();

  // limit
  auto* limit = app.add_subcommand("limit", "epsilon -> 0 fits against the r-airy curve");
  std::string samples_text;
  std::string limit_family = "tilde";
  limit->add_option("--r", r)->required();
  limit->add_option("--budget", budget)->required();
  limit->add_option("--samples", samples_text, "Comma-separated lambda samples");
  limit->add_option("--family", limit_family)->check(CLI::IsMember({"hat", "tilde"}));

  // airy eval
  auto* airy = app.add_subcommand("airy", "Generalized Airy asymptotics");
  airy->require_subcommand(1);
  auto* airy_eval = airy->add_subcommand("eval", "Asymptotic coefficients with an optional quadrature comparison");
  std::string airy_family = "lucas";
  long index = 1, airy_a = 0, airy_order = 3;
  double t = 4.0;
  bool numeric = false;
  airy_eval->add_option("--family", airy_family)->required()->check(CLI::IsMember({"lucas", "hyper"}));
  airy_eval->add_option("--r", r)->required();
  airy_eval->add_option("--index", index, "j for Airy-Lucas, k for hyper-Airy")->required();
  airy_eval->add_option("--a", airy_a, "Solution index a");
  airy_eval->add_option("--t", t)->required();
  airy_eval->add_option("--order", airy_order, "Truncation order of the compared series");
  airy_eval->add_flag("--numeric", numeric, "Compare with thimble quadrature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const bool use_cache = !no_cache;
    if (lucas->parsed()) {
      if (identities >= 0) {
        const Report rep = verify_lucas_identities(identities);
        Json doc = envelope("lucas-identities", Json{{"max", identities}});
        Json failures = Json::array();
        for (const auto& f : rep.failures) failures.push_back(f);
        doc["rows"].push_back(Json{{"checks", rep.checks}, {"failures", failures}});
        emit(doc, Output{"json", out.pretty});
        return exit_for(rep);
      }
      const BivariatePolynomial p = kind == "u" ? lucas_u(lucas_n) : lucas_v(lucas_n);
      Json doc = envelope("lucas", Json{{"kind", kind}, {"n", lucas_n}});
      for (long i = 0; i <= p.degree(); ++i) {
        const auto& tc = p.coeff(i);
        for (long j = 0; j <= tc.degree(); ++j)
          if (!is_zero(tc.coeff(j))) doc["rows"].push_back(Json{{"w", i}, {"t", j}, {"coeff", to_string(tc.coeff(j))}});
      }
      emit(doc, Output{"json", out.pretty});
      return 0;
    }
    if (series_b->parsed()) {
      const BSeries b = b_series(sr, sa, sorder);
      Json doc = envelope("series-b", Json{{"r", sr}, {"a", sa}, {"order", sorder}});
      for (const auto& c : b.b) doc["rows"].push_back(to_string(c));
      emit(doc, Output{"json", out.pretty});
      return 0;
    }
    if (series_p->parsed()) {
      const PTable table = p_table(sr, sorder);
      Json doc = envelope("series-p", Json{{"r", sr}, {"order", sorder}});
      for (long m = 0; m <= sorder; ++m) {
        Json row = Json::array();
        for (long a = 0; a <= sr - 2; ++a) row.push_back(to_string(table.at(m, a)));
        doc["rows"].push_back(row);
      }
      emit(doc, Output{"json", out.pretty});
      return 0;
    }
    if (tr->parsed() || intersect->parsed()) {
      const Rational lambda = parse_rational(lambda_text);
      const SpectralCurve c = build_curve(parse_family(curve), r, lambda);
      const std::string pipeline = tr->parsed() ? "tr" : "intersect";
      const Json params{{"curve", curve}, {"r", r}, {"lambda", to_string(lambda)}, {"g", g}, {"n", n}};
      const Json doc = cached(pipeline, params, use_cache, [&] {
        Json d = envelope(pipeline, params);
        d["rows"] = tr->parsed() ? correlator_rows(tr_correlator(c, g, n)) : table_rows(tr_intersections(c, g, n));
        return d;
      });
      emit(doc, out);
      return 0;
    }
    if (crosscheck->parsed()) {
      const Rational lambda = parse_rational(lambda_text);
      const CurveFamily fam = parse_family(family);
      const SpectralCurve c = build_curve(fam, r, lambda);
      const CohftSpec spec = fam == CurveFamily::Hat ? hat_spec(r, lambda, 3 * budget + 2) : tilde_spec(r, lambda, 3 * budget + 2);
      Json doc = envelope("crosscheck", Json{{"r", r}, {"family", family}, {"lambda", to_string(lambda)}, {"budget", budget}});
      Report rep;
      for (auto [gg, nn] : stable_range(budget)) {
        const IntersectionTable t = tr_intersections(c, gg, nn);
        for (const auto& [key, v] : t.entries) {
          const Rational giv = givental_correlator(spec, gg, key.second);
          Json row = insertion_json(key.second, gg);
          row["givental"] = to_string(giv);
          row["tr"] = to_string(v);
          row["match"] = giv == v;
          doc["rows"].push_back(row);
          rep.record(giv == v, "Givental vs TR at g=" + std::to_string(gg) + " n=" + std::to_string(nn));
        }
      }
      emit(doc, Output{"json", out.pretty});
      return exit_for(rep);
    }
    if (limit->parsed()) {
      const std::vector<Rational> samples = samples_text.empty() ? default_lambda_samples() : parse_samples(samples_text);
      const CurveFamily fam = parse_family(limit_family);
      const LimitReport rep = limit_check(r, budget, fam, samples);
      Json s = Json::array();
      for (const auto& l : samples) s.push_back(to_string(l));
      Json doc = envelope("limit", Json{{"r", r}, {"budget", budget}, {"family", limit_family}, {"samples", s}});
      doc["exploratory"] = rep.exploratory;
      doc["rows"] = limit_rows(rep);
      emit(doc, Output{"json", out.pretty});
      if (rep.exploratory) {
        if (!rep.report.passed()) std::cerr << "spinrec: exploratory hat limit: " << rep.report.summary() << "\n";
        return 0;
      }
      return exit_for(rep.report);
    }
    if (airy_eval->parsed()) {
      const bool lucas_family = airy_family == "lucas";
      const AsymptoticSolution sol = lucas_family ? airy_lucas_asymptotic(r, airy_a, index, airy_order + 1)
                                                  : hyper_airy_asymptotic(r, index, airy_a, airy_order + 1);
      Json doc = envelope("airy-eval", Json{{"family", airy_family}, {"r", r}, {"index", index}, {"a", airy_a},
                                            {"t", t}, {"order", airy_order}});
      doc["form"] = Json{{"prefactor", to_string(sol.exact_prefactor)},
                         {"numeric_prefactor", sol.numeric_prefactor},
                         {"rate", to_string(sol.rate)},
                         {"rate_exponent", to_string(sol.rate_exponent)},
                         {"power", to_string(sol.power)},
                         {"step", to_string(sol.step)}};
      for (long m = 0; m <= airy_order; ++m)
        doc["rows"].push_back(Json{{"m", m}, {"coeff", to_string(sol.coeffs[static_cast<std::size_t>(m)])}});
      Report rep;
      if (numeric) {
        QuadratureResult q;
        if (lucas_family) {
          if (r != 3 || airy_a != 0 || index != 1)
            throw std::invalid_argument("quadrature is available for the Airy-Lucas case r = 3, a = 0, j = 1 only");
          q = airy_quadrature(t);
        } else {
          if (airy_a != 0) throw std::invalid_argument("hyper-Airy quadrature is available for a = 0 only");
          q = hyper_airy_quadrature(r, index, t);
        }
        const AsymptoticComparison cmp = compare_with_asymptotics(q.value, q.est_error, sol, t, airy_order);
        doc["numeric"] = Json{{"quadrature", {q.value.real(), q.value.imag()}},
                              {"quadrature_error", q.est_error},
                              {"truncated", {cmp.truncated.real(), cmp.truncated.imag()}},
                              {"first_omitted", cmp.first_omitted},
                              {"deviation", cmp.deviation},
                              {"sign_flipped", cmp.sign_flipped},
                              {"agrees", cmp.agrees}};
        rep.record(cmp.agrees, "quadrature within the first omitted term");
      }
      emit(doc, Output{"json", out.pretty});
      return exit_for(rep);
    }
  } catch (const ConsistencyError& e) {
    std::cerr << "spinrec: consistency abort: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "spinrec: usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spinrec: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
