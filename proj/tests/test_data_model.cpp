#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "granimpute/common.hpp"
#include "granimpute/io.hpp"
#include "granimpute/rng.hpp"
#include "granimpute/table.hpp"
#include "test_support.hpp"

using namespace granimpute;
namespace ts = testsupport;

TEST_CASE("csv basic parse with missing token") {
  std::istringstream in("a,b\n1,?\n2,3\n");
  const Table t = load_table(in, TableFormat::csv);
  REQUIRE(t.n_rows() == 2);
  REQUIRE(t.n_cols() == 2);
  CHECK(t.columns[0].kind == FeatureKind::numeric);
  CHECK(t.is_missing(0, 1));
  CHECK_FALSE(t.is_missing(1, 1));
  CHECK(t.value(1, 1) == 3.0);
  CHECK_FALSE(t.label_col.has_value());
}

TEST_CASE("csv mixed tokens force a categorical column") {
  std::istringstream in("a,b\nx,1\ny,2\nx,3\n");
  const Table t = load_table(in, TableFormat::csv);
  CHECK(t.columns[0].kind == FeatureKind::categorical);
  CHECK(t.columns[1].kind == FeatureKind::numeric);
  CHECK(t.columns[0].tokens[0] == "x");
  CHECK(t.columns[0].tokens[1] == "y");
}

TEST_CASE("csv quoting: embedded commas, quotes, newlines") {
  std::istringstream in("name,v\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n\"l1\nl2\",3\n");
  const Table t = load_table(in, TableFormat::csv);
  REQUIRE(t.n_rows() == 3);
  CHECK(t.columns[0].tokens[0] == "a,b");
  CHECK(t.columns[0].tokens[1] == "say \"hi\"");
  CHECK(t.columns[0].tokens[2] == "l1\nl2");
}

TEST_CASE("csv structural errors are data errors") {
  auto load = [](const char* text) {
    std::istringstream in(text);
    return load_table(in, TableFormat::csv);
  };
  CHECK_THROWS_AS(load(""), DataError);
  CHECK_THROWS_AS(load("a,b\n"), DataError);          // header only
  CHECK_THROWS_AS(load("a,a\n1,2\n"), DataError);     // duplicate names
  CHECK_THROWS_AS(load("a,b\n1\n"), DataError);       // ragged row
  CHECK_THROWS_AS(load("a,b\n\"1,2\n"), DataError);   // unterminated quote
}

TEST_CASE("csv custom missing tokens replace the defaults") {
  std::istringstream in("a,b\n-,1\n?,2\n");
  const MissingTokenSet missing({"-"});
  const Table t = load_table(in, TableFormat::csv, missing);
  CHECK(t.is_missing(0, 0));
  CHECK_FALSE(t.is_missing(1, 0));       // "?" is data under the custom set
  CHECK(t.columns[0].kind == FeatureKind::categorical);
}

TEST_CASE("label column is the one named class, case-insensitive") {
  std::istringstream in("a,Class\n1,yes\n2,no\n");
  const Table t = load_table(in, TableFormat::csv);
  REQUIRE(t.label_col.has_value());
  CHECK(*t.label_col == 1);
  CHECK(t.feature_cols() == std::vector<int>{0});
}

TEST_CASE("arff parse: numeric and nominal attributes, ? missing") {
  std::istringstream in(
      "% comment\n"
      "@relation demo\n"
      "@attribute a numeric\n"
      "@attribute 'two words' real\n"
      "@attribute class {0,1}\n"
      "@data\n"
      "1, 2.5, 0\n"
      "?, 3.5, 1\n");
  const Table t = load_table(in, TableFormat::arff);
  REQUIRE(t.n_rows() == 2);
  REQUIRE(t.n_cols() == 3);
  CHECK(t.columns[1].name == "two words");
  CHECK(t.is_missing(1, 0));
  CHECK(t.columns[2].kind == FeatureKind::categorical);
  REQUIRE(t.label_col.has_value());
  CHECK(*t.label_col == 2);
}

TEST_CASE("arff rejects sparse data, unknown types, and domain breaches") {
  auto load = [](const char* text) {
    std::istringstream in(text);
    return load_table(in, TableFormat::arff);
  };
  CHECK_THROWS_AS(load("@attribute a numeric\n@data\n{0 1}\n"), DataError);
  CHECK_THROWS_AS(load("@attribute a date\n@data\n1\n"), DataError);
  CHECK_THROWS_AS(load("@attribute a {x,y}\n@data\nz\n"), DataError);
  CHECK_THROWS_AS(load("@attribute a numeric\n@data\n"), DataError);
}

TEST_CASE("format is picked from the file extension") {
  CHECK(format_from_path("x/data.arff") == TableFormat::arff);
  CHECK(format_from_path("x/data.ARFF") == TableFormat::arff);
  CHECK(format_from_path("x/data.csv") == TableFormat::csv);
  CHECK(format_from_path("noext") == TableFormat::csv);
}

TEST_CASE("mask matches missing cells and counts zeros") {
  const Table t = ts::toy_financial_table();
  const MaskMatrix m = build_mask(t);
  CHECK(m.rows == 6);
  CHECK(m.cols == 7);
  CHECK(m.is_missing(5, 1));
  CHECK(m.is_missing(3, 3));
  CHECK_FALSE(m.is_missing(0, 0));
  CHECK(m.zero_count() == 2);
  CHECK(m.zero_count() == t.missing_count_features());

  SUBCASE("1x1 missing table gives the all-zero mask") {
    const Table tiny = ts::make_table({ts::num_col("a", {ts::kMissing})});
    const MaskMatrix mm = build_mask(tiny);
    CHECK(mm.zero_count() == 1);
    CHECK(mm.is_missing(0, 0));
  }
}

TEST_CASE("mask zero count equals missing tokens in the source stream") {
  Rng rng(11);
  for (int it = 0; it < 5; ++it) {
    std::string csv = "a,b,c\n";
    size_t expected = 0;
    for (int r = 0; r < 20; ++r) {
      for (int c = 0; c < 3; ++c) {
        if (c) csv += ',';
        if (rng.uniform() < 0.3) {
          csv += '?';
          ++expected;
        } else {
          csv += format_double(rng.uniform(-5, 5));
        }
      }
      csv += '\n';
    }
    std::istringstream in(csv);
    const Table t = load_table(in, TableFormat::csv);
    CHECK(build_mask(t).zero_count() == expected);
  }
}

TEST_CASE("categorical codes are i/C in lexicographic token order") {
  const Table t = ts::make_table(
      {ts::cat_col("grade", {"mid", "top", "low", "mid", ""})});
  const auto [encoded, map] = encode_categoricals(t);
  REQUIRE(map.codings.size() == 1);
  const CategoryCoding& coding = map.codings[0];
  CHECK(coding.categories == std::vector<std::string>{"low", "mid", "top"});
  CHECK(coding.codes[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(coding.codes[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(coding.codes[2] == 1.0);
  CHECK(encoded.columns[0].kind == FeatureKind::numeric);
  CHECK(encoded.value(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(encoded.value(1, 0) == 1.0);
  CHECK(encoded.value(2, 0) == doctest::Approx(1.0 / 3));
  CHECK(encoded.is_missing(4, 0));
  CHECK(encoded.all_numeric());

  SUBCASE("single category maps to 1") {
    const Table one = ts::make_table({ts::cat_col("k", {"only", "only"})});
    const auto [enc, m] = encode_categoricals(one);
    CHECK(enc.value(0, 0) == 1.0);
    CHECK(enc.value(1, 0) == 1.0);
    CHECK(m.codings[0].codes == std::vector<double>{1.0});
  }

  SUBCASE("numeric columns pass through untouched") {
    const Table num = ts::make_table({ts::num_col("v", {0, 1})});
    const auto [enc, m] = encode_categoricals(num);
    CHECK(m.codings.empty());
    CHECK(enc.value(0, 0) == 0.0);
    CHECK(enc.value(1, 0) == 1.0);
  }
}

TEST_CASE("encoding is deterministic in input order") {
  const Table a = ts::make_table({ts::cat_col("c", {"b", "a", "c"})});
  const Table b = ts::make_table({ts::cat_col("c", {"c", "b", "a"})});
  const auto [ea, ma] = encode_categoricals(a);
  const auto [eb, mb] = encode_categoricals(b);
  CHECK(ma.codings[0].categories == mb.codings[0].categories);
  CHECK(ma.codings[0].codes == mb.codings[0].codes);
}

TEST_CASE("standardize centers and scales with population deviation") {
  SUBCASE("two points") {
    const Table t = ts::make_table({ts::num_col("v", {2, 4})});
    const auto [s, p] = standardize(t);
    CHECK(s.value(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.value(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.per_col[0].mean == 3.0);
    CHECK(p.per_col[0].stddev == 1.0);
  }
  SUBCASE("constant column maps to zero") {
    const Table t = ts::make_table({ts::num_col("v", {5, 5, 5})});
    const auto [s, p] = standardize(t);
    CHECK(s.value(0, 0) == 0.0);
    CHECK(s.value(2, 0) == 0.0);
    CHECK(p.per_col[0].stddev == 0.0);
  }
  SUBCASE("missing cells are skipped by the statistics") {
    const Table t = ts::make_table({ts::num_col("v", {1, ts::kMissing, 3})});
    const auto [s, p] = standardize(t);
    CHECK(s.value(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s.is_missing(1, 0));
    CHECK(s.value(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.per_col[0].mean == 2.0);
    CHECK(p.per_col[0].stddev == 1.0);
  }
  SUBCASE("label column is left untouched") {
    const Table t = ts::make_table(
        {ts::num_col("v", {2, 4}), ts::num_col("class", {0, 1})}, 1);
    const auto [s, p] = standardize(t);
    CHECK(s.value(0, 1) == 0.0);
    CHECK(s.value(1, 1) == 1.0);
    CHECK_FALSE(p.per_col[1].standardized);
  }
}

TEST_CASE("standardized columns have zero mean and unit variance") {
  Rng rng(23);
  const Table t = ts::random_table(rng, 80, 6, 0.2);
  const auto [s, p] = standardize(t);
  for (size_t c = 0; c < s.n_cols(); ++c) {
    double sum = 0.0, ss = 0.0;
    size_t n = 0;
    for (size_t r = 0; r < s.n_rows(); ++r) {
      if (s.is_missing(r, c)) continue;
      sum += s.value(r, c);
      ++n;
    }
    REQUIRE(n > 1);
    const double mean = sum / static_cast<double>(n);
    for (size_t r = 0; r < s.n_rows(); ++r) {
      if (!s.is_missing(r, c)) {
        ss += (s.value(r, c) - mean) * (s.value(r, c) - mean);
      }
    }
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(ss / static_cast<double>(n) - 1.0) < 1e-9);
  }

  SUBCASE("inverse transform round-trips") {
    const Table back = inverse_standardize(s, p);
    for (size_t c = 0; c < t.n_cols(); ++c) {
      for (size_t r = 0; r < t.n_rows(); ++r) {
        CHECK(back.is_missing(r, c) == t.is_missing(r, c));
        if (!t.is_missing(r, c)) {
          CHECK(ts::rel_err(back.value(r, c), t.value(r, c)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("csv writer round-trips tokens that need quoting") {
  const Table t = ts::make_table(
      {ts::cat_col("name", {"a,b", "say \"hi\"", "plain"}),
       ts::num_col("v", {1, ts::kMissing, 0.5})});
  std::ostringstream out;
  write_csv(t, out);
  std::istringstream in(out.str());
  const Table back = load_table(in, TableFormat::csv);
  REQUIRE(back.n_rows() == 3);
  CHECK(back.columns[0].tokens[0] == "a,b");
  CHECK(back.columns[0].tokens[1] == "say \"hi\"");
  CHECK(back.is_missing(1, 1));
  CHECK(back.value(2, 1) == 0.5);
}

TEST_CASE("number formatting survives a parse round-trip") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.below(12));
    double back = 0.0;
    REQUIRE(parse_double(format_double(v), back));
    CHECK(back == v);
  }
  double out = 0.0;
  CHECK_FALSE(parse_double("1.5x", out));
  CHECK_FALSE(parse_double("", out));
  CHECK_FALSE(parse_double("inf", out));
  CHECK(parse_double("+2.5", out));
  CHECK(out == 2.5);
}
