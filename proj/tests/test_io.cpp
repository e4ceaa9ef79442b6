#include <gtest/gtest.h>

#include <filesystem>

#include "spinrec/io.hpp"

using namespace spinrec;

TEST(Io, CyclotomicRoundTrip) {
  for (const Cyclotomic& x : {Cyclotomic(make_rational(-2, 3)), root_of_unity(5, 2) + Cyclotomic(7), sqrt_integer(2)}) {
    EXPECT_EQ(parse_cyclotomic(to_string(x)), x) << to_string(x);
  }
  EXPECT_THROW(parse_cyclotomic("{m=5:1,2"), std::invalid_argument);
}

TEST(Io, TableRoundTrip) {
  const IntersectionTable t = tr_intersections(build_curve(CurveFamily::RAiry, 2), 1, 1);
  const Json rows = table_rows(t);
  // <tau_0>_1 is off the dimension shell and listed as zero.
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].dump(), R"({"g":1,"a":[0],"k":[0],"value":"0"})");
  EXPECT_EQ(rows[1].dump(), R"({"g":1,"a":[0],"k":[1],"value":"1/24"})");
  const IntersectionTable back = table_from_rows(Json::parse(rows.dump()));
  EXPECT_EQ(back.entries, t.entries);
}

TEST(Io, CorrelatorRoundTrip) {
  const Correlator c = tr_correlator(build_curve(CurveFamily::Hat, 4, 1), 0, 3);
  const Correlator back = correlator_from_rows(0, 3, Json::parse(correlator_rows(c).dump()));
  EXPECT_EQ(back.entries, c.entries);
  const Correlator w = be_recursion(3, 0, 3);
  const Json rows = correlator_rows(w);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0]["coeff"], "-2/3");
}

TEST(Io, Csv) {
  Json doc = envelope("intersect", Json::object());
  doc["rows"] = table_rows(tr_intersections(build_curve(CurveFamily::RAiry, 2), 0, 3));
  EXPECT_EQ(rows_to_csv(doc), "g,a,k,value\n0,0 0 0,0 0 0,1\n");
  Json corr = envelope("tr", Json::object());
  corr["rows"] = correlator_rows(be_recursion(3, 0, 3));
  EXPECT_EQ(rows_to_csv(corr), "poles,coeff\n0:2 0:2 0:3,-2/3\n");
}

TEST(Io, CacheIsContentAddressedAndAtomic) {
  const auto dir = std::filesystem::temp_directory_path() / ("spinrec-test-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  ResultCache cache(dir);
  const std::string k1 = ResultCache::key("tr", Json{{"r", 3}});
  const std::string k2 = ResultCache::key("tr", Json{{"r", 4}});
  EXPECT_NE(k1, k2);
  EXPECT_EQ(k1, ResultCache::key("tr", Json{{"r", 3}}));
  EXPECT_FALSE(cache.load(k1));
  cache.store(k1, "payload\n");
  cache.store(k1, "ignored");
  EXPECT_EQ(cache.load(k1).value(), "payload\n");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
  std::filesystem::remove_all(dir);
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
