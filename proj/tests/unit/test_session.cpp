#include <doctest.h>

#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "formsense/session.hpp"

using namespace formsense;

namespace {

Session small_session() {
  std::vector<Product> products;
  for (int id = 1; id <= 5; ++id) products.push_back({id, "G" + std::to_string(id), {8, 5, 6.0 + id}});
  return Session("t", products);
}

void cover_all_but_5(Session& s) {
  for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}, {1, 5}, {2, 5}})
    s.add_comparison(i, j, 1);
}

}  // namespace

TEST_CASE("comparisons are stored canonically and revisions audited") {
  auto s = small_session();
  s.add_comparison(1, 2, 0);
  s.add_comparison(5, 1, 2);
  CHECK(s.dissimilarities().value(1, 5) == 2);
  s.add_comparison(1, 5, 3);
  CHECK(s.dissimilarities().value(1, 5) == 3);
  CHECK(s.dissimilarities().entries.size() == 2);
  REQUIRE(s.audit().size() == 3);
  CHECK(s.audit()[2].previous == 2);
  CHECK(s.audit()[2].value == 3);
  CHECK_FALSE(s.audit()[0].previous.has_value());

  CHECK_THROWS_AS(s.add_comparison(2, 2, 1), RangeError);
  CHECK_THROWS_AS(s.add_comparison(1, 2, 4), RangeError);
  CHECK_THROWS_AS(s.add_comparison(1, 9, 1), NotFound);
}

TEST_CASE("stage gating") {
  auto s = small_session();
  AppealScores appeal{{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}};
  CHECK_THROWS_AS(s.set_appeal(appeal), StageOrderError);

  cover_all_but_5(s);
  try {
    s.complete_stage1();
    FAIL("expected CoverageError");
  } catch (const CoverageError& e) {
    CHECK(e.under_covered() == std::vector<int>{5});
  }
  CHECK(s.stage_status(1) == StageStatus::Open);

  s.add_comparison(3, 5, 2);
  s.complete_stage1();
  CHECK(s.stage_status(1) == StageStatus::Complete);
  CHECK_THROWS_AS(s.add_comparison(4, 5, 1), StageOrderError);

  RuleAssessmentSet rules;
  for (int id = 1; id <= 5; ++id) rules[id] = {-1, 1, -1};
  CHECK_THROWS_AS(s.set_rules(rules), StageOrderError);

  CHECK_THROWS_AS(s.set_appeal({{1, 1}}), RangeError);
  CHECK_THROWS_AS(s.set_appeal({{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 11}}), RangeError);
  s.set_appeal(appeal);
  CHECK(s.stage_status(2) == StageStatus::Complete);

  rules[3] = {0, 2, 0};
  CHECK_THROWS_AS(s.set_rules(rules), RangeError);
  rules[3] = {0, 0, 0};
  s.set_rules(rules);
  CHECK(s.all_complete());
}

TEST_CASE("session json round-trip") {
  auto s = small_session();
  cover_all_but_5(s);
  s.add_comparison(3, 5, 2);
  s.add_comparison(3, 5, 0);
  s.complete_stage1();
  s.set_appeal({{1, 1}, {2, 2.5}, {3, 3}, {4, 4}, {5, 5}});
  const auto back = Session::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK(back.dissimilarities().entries == s.dissimilarities().entries);
  CHECK(back.stage_status(2) == StageStatus::Complete);
  CHECK(back.stage_status(3) == StageStatus::Open);
  CHECK(back.audit().size() == s.audit().size());
}

TEST_CASE("stored sessions that break the stage order are rejected") {
  auto j = small_session().to_json();
  j["stage2"]["status"] = "complete";
  CHECK_THROWS_AS(Session::from_json(j), StageOrderError);
  CHECK_THROWS_AS(Session::from_json(nlohmann::json::object()), ParseError);
}

TEST_CASE("sessions built from the bundled tables") {
  const auto dir = fixture_dir();
  const auto rules_text = read_file(dir / "rules.csv");
  const auto s = session_from_tables("bundled", load_matrix(read_file(dir / "dissim.csv")),
                                     load_appeal(read_file(dir / "appeal.csv")), load_rules(rules_text),
                                     load_dims(rules_text));
  CHECK(s.all_complete());
  CHECK(s.product_count() == 18);
  CHECK(s.under_covered().empty());
}

TEST_CASE("product invariants") {
  CHECK_THROWS_AS(Session("x", {{1, "", {8, 5, 8}}}), InvalidInput);
  CHECK_THROWS_AS(Session("x", {{1, "", {8, 5, 8}}, {3, "", {8, 5, 8}}}), InvalidInput);
  CHECK_THROWS_AS(Session("x", {{1, "", {8, 5, 8}}, {2, "", {8, 0, 8}}}), RangeError);
}
