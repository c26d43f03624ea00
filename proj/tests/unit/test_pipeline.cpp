#include <doctest.h>

#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "formsense/pipeline.hpp"
#include "formsense/session.hpp"

using namespace formsense;

TEST_CASE("pipeline output is deterministic") {
  const auto inputs = load_pipeline_inputs(fixture_dir());
  const auto a = run_pipeline(inputs);
  const auto b = run_pipeline(inputs);
  CHECK(report_text(a) == report_text(b));
  CHECK(a.artifacts == b.artifacts);
  for (const char* name : {"configuration.csv", "perceptual_map.svg", "appeal_vector.svg", "colormap.svg",
                           "iso_lines.svg", "model.json", "surface.csv", "iso_lines.csv"})
    CHECK(a.artifacts.count(name) == 1);
}

TEST_CASE("report sections") {
  const auto r = run_pipeline(load_pipeline_inputs(fixture_dir()));
  const auto& j = r.json;
  CHECK(j.at("seed") == 0);
  CHECK(j.at("inputs").at("products") == 18);
  CHECK(j.at("mds").at("stress_by_k").size() == 3);
  CHECK(j.at("prefmap").at("r_squared").get<double>() > 0.8);
  CHECK(j.at("appeal").contains("reference"));
  CHECK(j.at("surface").contains("iso"));
  CHECK(j.at("artifacts").size() == r.artifacts.size());
}

TEST_CASE("a different seed is recorded and still yields a valid report") {
  PipelineOptions opt;
  opt.seed = 11;
  opt.mds_restarts = 5;
  opt.fit_starts = 5;
  const auto r = run_pipeline(load_pipeline_inputs(fixture_dir()), opt);
  CHECK(r.json.at("seed") == 11);
}

TEST_CASE("sessions feed the pipeline like the bundled tables") {
  const auto dir = fixture_dir();
  const auto files = load_pipeline_inputs(dir);
  const auto session = session_from_tables("t", files.matrix, files.appeal, files.rules, files.dims);
  const auto from_session = inputs_from_session(session, files.reference);
  CHECK(from_session.matrix.entries == files.matrix.entries);
  CHECK(from_session.appeal == files.appeal);
  CHECK(from_session.rules == files.rules);
  PipelineOptions opt;
  opt.mds_restarts = 4;
  opt.fit_starts = 4;
  CHECK(report_text(run_pipeline(from_session, opt)) == report_text(run_pipeline(files, opt)));

  std::vector<Product> products;
  for (const auto& [id, d] : files.dims) products.push_back({id, "", d});
  CHECK_THROWS_AS(inputs_from_session(Session("open", products)), StageOrderError);
}
