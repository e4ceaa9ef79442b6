#pragma once

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinrec/cohft.hpp"
#include "spinrec/limits.hpp"
#include "spinrec/specrec.hpp"

namespace spinrec {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------------------------
// Exact scalars as strings

/// Inverse of to_string(Cyclotomic): "p/q" or "{m=M:c0,c1,...}".
inline Cyclotomic parse_cyclotomic(const std::string& text) {
  if (text.rfind("{m=", 0) != 0) return Cyclotomic(parse_rational(text));
  const auto colon = text.find(':');
  if (colon == std::string::npos || text.back() != '}') throw std::invalid_argument("malformed cyclotomic '" + text + "'");
  const long m = std::stol(text.substr(3, colon - 3));
  std::vector<Rational> coeffs;
  std::stringstream body(text.substr(colon + 1, text.size() - colon - 2));
  std::string item;
  while (std::getline(body, item, ',')) coeffs.push_back(parse_rational(item));
  return Cyclotomic(m, std::move(coeffs));
}

inline Json envelope(const std::string& pipeline, Json params) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["pipeline"] = pipeline;
  j["params"] = std::move(params);
  j["rows"] = Json::array();
  return j;
}

// ---------------------------------------------------------------------------------------------
// Tables and correlators

inline Json table_rows(const IntersectionTable& t) {
  Json rows = Json::array();
  for (const auto& [key, v] : t.entries) {
    Json a = Json::array(), k = Json::array();
    for (const auto& ins : key.second) {
      a.push_back(ins.a);
      k.push_back(ins.k);
    }
    rows.push_back(Json{{"g", key.first}, {"a", a}, {"k", k}, {"value", to_string(v)}});
  }
  return rows;
}

inline IntersectionTable table_from_rows(const Json& rows) {
  IntersectionTable t;
  for (const auto& row : rows) {
    std::vector<Insertion> ins;
    const auto& a = row.at("a");
    const auto& k = row.at("k");
    if (a.size() != k.size()) throw std::invalid_argument("row has mismatched a and k lists");
    for (std::size_t i = 0; i < a.size(); ++i) ins.push_back({a[i].get<long>(), k[i].get<long>()});
    t.set(row.at("g").get<long>(), ins, parse_rational(row.at("value").get<std::string>()));
  }
  return t;
}

inline Json correlator_rows(const Correlator& c) {
  Json rows = Json::array();
  for (const auto& [key, v] : c.entries) {
    Json poles = Json::array();
    for (const auto& p : key) poles.push_back(Json::array({p.first, p.second}));
    rows.push_back(Json{{"poles", poles}, {"coeff", to_string(v)}});
  }
  return rows;
}

inline Correlator correlator_from_rows(long g, long n, const Json& rows) {
  Correlator c;
  c.g = g;
  c.n = n;
  for (const auto& row : rows) {
    std::vector<Pole> key;
    for (const auto& p : row.at("poles")) key.push_back({p.at(0).get<long>(), p.at(1).get<long>()});
    std::sort(key.begin(), key.end());
    c.entries[key] = parse_cyclotomic(row.at("coeff").get<std::string>());
  }
  return c;
}

inline Json limit_rows(const LimitReport& rep) {
  Json rows = Json::array();
  for (const auto& e : rep.entries) {
    Json a = Json::array(), k = Json::array(), poly = Json::array();
    for (const auto& ins : e.insertions) {
      a.push_back(ins.a);
      k.push_back(ins.k);
    }
    for (const auto& c : e.epsilon_poly) poly.push_back(to_string(c));
    rows.push_back(Json{{"key", Json{{"g", e.g}, {"a", a}, {"k", k}}},
                        {"epsilon_poly", poly},
                        {"rairy_value", to_string(e.rairy_value)},
                        {"match", e.match}});
  }
  return rows;
}

// ---------------------------------------------------------------------------------------------
// CSV

namespace io_detail {

inline std::string join_longs(const Json& arr) {
  std::string s;
  for (std::size_t i = 0; i < arr.size(); ++i) s += (i ? " " : "") + std::to_string(arr[i].get<long>());
  return s;
}

}  // namespace io_detail

/// CSV with the same string-encoded exact values as the JSON rows.
inline std::string rows_to_csv(const Json& doc) {
  std::ostringstream out;
  const Json& rows = doc.at("rows");
  if (rows.empty()) return "";
  const Json& first = rows.front();
  if (first.contains("poles")) {
    out << "poles,coeff\n";
    for (const auto& row : rows) {
      std::string poles;
      for (const auto& p : row.at("poles"))
        poles += (poles.empty() ? "" : " ") + std::to_string(p.at(0).get<long>()) + ":" + std::to_string(p.at(1).get<long>());
      out << poles << "," << row.at("coeff").get<std::string>() << "\n";
    }
  } else if (first.contains("value")) {
    out << "g,a,k,value\n";
    for (const auto& row : rows)
      out << row.at("g").get<long>() << "," << io_detail::join_longs(row.at("a")) << "," << io_detail::join_longs(row.at("k"))
          << "," << row.at("value").get<std::string>() << "\n";
  } else {
    throw std::invalid_argument("csv export supports correlator and intersection rows only");
  }
  return out.str();
}

// ---------------------------------------------------------------------------------------------
// Cache

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// Content-addressed store of serialized results; entries are written once via temp file and rename.
class ResultCache {
 public:
  explicit ResultCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static ResultCache from_environment() {
    const char* env = std::getenv("SPINREC_CACHE");
    return ResultCache(env && *env ? std::filesystem::path(env) : std::filesystem::path(".spinrec-cache"));
  }

  const std::filesystem::path& directory() const { return dir_; }

  static std::string key(const std::string& pipeline, const Json& params) {
    Json k{{"schema", kSchemaVersion}, {"pipeline", pipeline}, {"params", params}};
    return sha256_hex(k.dump());
  }

  std::optional<std::string> load(const std::string& key) const {
    std::ifstream in(dir_ / (key + ".json"), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void store(const std::string& key, const std::string& payload) const {
    std::filesystem::create_directories(dir_);
    const auto final_path = dir_ / (key + ".json");
    if (std::filesystem::exists(final_path)) return;
    std::random_device rd;
    const auto tmp = dir_ / (key + ".tmp." + std::to_string(rd()));
    {
      std::ofstream out(tmp, std::ios::binary);
      out << payload;
      if (!out) throw std::runtime_error("cache write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, final_path);
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace spinrec
