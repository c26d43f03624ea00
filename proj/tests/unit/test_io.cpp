#include <doctest.h>

#include <set>
#include <sstream>

#include "formsense/error.hpp"
#include "formsense/io.hpp"

using namespace formsense;

namespace {

std::string fixture(const char* name) { return read_file(fixture_dir() / name); }

// Independent tally: split the raw CSV and count non-`*` cells above the diagonal.
int count_observed_upper(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int row = 0, count = 0;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    for (int col = 1; std::getline(cells, cell, ','); ++col)
      if (col > row && cell != "*") ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("bundled dissimilarity matrix loads and validates") {
  const auto text = fixture("dissim.csv");
  const auto m = load_matrix(text);
  CHECK(m.n == 18);
  CHECK(static_cast<int>(m.entries.size()) == count_observed_upper(text));
  CHECK(validate_dissimilarity(m).valid());
  CHECK(m.value(1, 7) == 0);
  CHECK(m.value(7, 1) == 0);
  CHECK_FALSE(m.value(1, 3).has_value());
  for (const auto& e : m.entries) CHECK(e.i < e.j);
}

TEST_CASE("coverage and range violations are reported") {
  SparseDissimilarityMatrix m;
  m.n = 5;
  m.entries = {{1, 2, 1}, {1, 3, 2}, {1, 4, 3}, {2, 3, 1}, {2, 4, 2}, {3, 4, 1}, {1, 5, 1}, {2, 5, 2}};
  auto report = validate_dissimilarity(m);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].kind == Violation::Kind::Coverage);
  CHECK(report.violations[0].message == "coverage(5)=2 < 3");

  m.entries.push_back({3, 5, 4});
  report = validate_dissimilarity(m);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].kind == Violation::Kind::ValueOutOfRange);
  CHECK(report.violations[0].message.find("value out of 0..3") != std::string::npos);

  m.entries.back() = {3, 3, 1};
  report = validate_dissimilarity(m);
  bool self = false;
  for (const auto& v : report.violations) self = self || v.kind == Violation::Kind::SelfPair;
  CHECK(self);
}

TEST_CASE("load_matrix small cases") {
  const auto m = load_matrix("id,1,2\n1,0,2\n2,2,0\n");
  REQUIRE(m.entries.size() == 1);
  CHECK(m.entries[0] == DissimilarityEntry{1, 2, 2});

  try {
    load_matrix("id,1,2\n1,0,2\n2,1,0\n");
    FAIL("expected AsymmetryError");
  } catch (const AsymmetryError& e) {
    CHECK(e.i() == 1);
    CHECK(e.j() == 2);
  }
  CHECK_THROWS_AS(load_matrix("id,1,2\n1,0,*\n2,1,0\n"), AsymmetryError);
  CHECK_THROWS_AS(load_matrix("id,1,2\n1,1,2\n2,2,0\n"), NonZeroDiagonal);
  CHECK_THROWS_AS(load_matrix("id,1,2\n1,0,x\n2,x,0\n"), ParseError);
  CHECK_THROWS_AS(load_matrix("id,1,2\n1,0,2\n"), ParseError);
}

TEST_CASE("appeal, rules and dims fixtures") {
  const auto appeal = load_appeal(fixture("appeal.csv"));
  CHECK(appeal.size() == 18);
  CHECK(appeal.at(4) == 10);
  CHECK(appeal.at(2) == 0);

  const auto rules_text = fixture("rules.csv");
  const auto rules = load_rules(rules_text);
  CHECK(rules.at(7)[1] == 1);
  CHECK(rules.at(7)[0] == -1);
  CHECK(rules.at(10)[2] == 0);

  const auto dims = load_dims(rules_text);
  CHECK(dims.at(10) == DesignParams{8, 5, 6});
  const std::set<double> d2s{3, 5, 7}, d3s{6, 7, 8, 9, 9.5};
  for (const auto& [id, d] : dims) {
    CHECK(d.d1 == 8);
    CHECK(d2s.count(d.d2) == 1);
    CHECK(d3s.count(d.d3) == 1);
  }
}

TEST_CASE("loaders report range and parse errors with rows") {
  try {
    load_appeal("id,score\n1,5\n2,11\n");
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(load_appeal("id,score\n1,abc\n"), ParseError);
  CHECK_THROWS_AS(load_rules("id,d1,d2,d3,R1,R2,R3\n1,8,5,8,2,0,0\n"), RangeError);
  CHECK_THROWS_AS(load_dims("id,d1,d2,d3\n1,8,0,8\n"), RangeError);
}

TEST_CASE("fixture files round-trip through their serializers") {
  const auto m = load_matrix(fixture("dissim.csv"));
  CHECK(load_matrix(serialize_matrix(m)).entries == m.entries);
  CHECK(serialize_matrix(load_matrix(serialize_matrix(m))) == serialize_matrix(m));

  const auto appeal = load_appeal(fixture("appeal.csv"));
  CHECK(load_appeal(serialize_appeal(appeal)) == appeal);
  CHECK(serialize_appeal(appeal) == fixture("appeal.csv"));

  const auto rules_text = fixture("rules.csv");
  const auto rules = load_rules(rules_text);
  const auto dims = load_dims(rules_text);
  CHECK(serialize_rules(rules, dims) == rules_text);
  CHECK(serialize_matrix(m) == fixture("dissim.csv"));
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(9.5) == "9.5");
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_fixed(-0.0001, 2) == "0.00");
  CHECK(format_fixed(2.345, 1) == "2.3");
}
