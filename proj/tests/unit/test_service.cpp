#include <doctest.h>

#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <thread>

#include "formsense/io.hpp"
#include "formsense/pipeline.hpp"
#include "formsense/service.hpp"

using namespace formsense;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("formsense_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A server on an ephemeral localhost port, stopped on destruction.
class TestServer {
 public:
  explicit TestServer(const fs::path& data) : store_(data) {
    ServiceConfig config;
    config.data_dir = data;
    config.fixture_dir = fixture_dir();
    install_routes(server_, store_, config);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

 private:
  SessionStore store_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

json post(httplib::Client& c, const std::string& path, const json& body, int expected) {
  const auto r = c.Post(path, body.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == expected);
  return json::parse(r->body);
}

json put(httplib::Client& c, const std::string& path, const json& body, int expected) {
  const auto r = c.Put(path, body.dump(), "application/json");
  REQUIRE(r);
  CHECK(r->status == expected);
  return json::parse(r->body);
}

void fill_from_fixtures(httplib::Client& c, const std::string& id) {
  const auto in = load_pipeline_inputs(fixture_dir());
  for (const auto& e : in.matrix.entries)
    post(c, "/sessions/" + id + "/comparisons", {{"i", e.i}, {"j", e.j}, {"value", e.value}}, 200);
  post(c, "/sessions/" + id + "/stage1/complete", json::object(), 200);
  json appeal = json::object(), rules = json::object();
  for (const auto& [pid, v] : in.appeal) appeal[std::to_string(pid)] = v;
  for (const auto& [pid, r] : in.rules) rules[std::to_string(pid)] = r;
  put(c, "/sessions/" + id + "/appeal", appeal, 200);
  put(c, "/sessions/" + id + "/rules", rules, 200);
}

}  // namespace

TEST_CASE("session lifecycle and error mapping") {
  TestServer server(fresh_dir("lifecycle"));
  auto c = server.client();
  const auto created = post(c, "/sessions", {{"id", "alpha"}}, 201);
  CHECK(created.at("id") == "alpha");
  CHECK(created.at("products").size() == 18);
  CHECK(post(c, "/sessions", {{"id", "alpha"}}, 409).at("error") == "AlreadyExists");
  post(c, "/sessions", {{"id", "bad id!"}}, 422);

  const auto r = c.Get("/sessions/nobody");
  REQUIRE(r);
  CHECK(r->status == 404);
  CHECK(json::parse(r->body).at("error") == "NotFound");

  // Appeal before stage 1 is complete is out of order.
  const auto early = put(c, "/sessions/alpha/appeal", {{"1", 5}}, 409);
  CHECK(early.at("error") == "StageOrderError");

  const auto cov = post(c, "/sessions/alpha/comparisons", {{"i", 2}, {"j", 1}, {"value", 3}}, 200);
  CHECK(cov.at("coverage").at("1") == 1);
  CHECK(cov.at("coverage").at("2") == 1);
  post(c, "/sessions/alpha/comparisons", {{"i", 1}, {"j", 2}, {"value", 4}}, 422);
  post(c, "/sessions/alpha/comparisons", {{"i", 1}, {"j", 99}, {"value", 1}}, 404);

  const auto bad = c.Post("/sessions/alpha/comparisons", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  const auto incomplete = post(c, "/sessions/alpha/stage1/complete", json::object(), 409);
  CHECK(incomplete.at("error") == "CoverageError");
  CHECK(incomplete.at("under_covered").size() == 18);

  post(c, "/sessions/alpha/analyze", json::object(), 409);

  const auto stored = json::parse(c.Get("/sessions/alpha")->body);
  CHECK(stored.at("stage1").at("status") == "open");
}

TEST_CASE("a comparison written is read back") {
  TestServer server(fresh_dir("write_read"));
  auto c = server.client();
  post(c, "/sessions", {{"id", "wr"}}, 201);
  post(c, "/sessions/wr/comparisons", {{"i", 1}, {"j", 7}, {"value", 0}}, 200);
  const auto s = json::parse(c.Get("/sessions/wr")->body);
  CHECK(s.at("stage1").at("comparisons") == json::array({json::array({1, 7, 0})}));
}

TEST_CASE("completion is refused while a product is under-covered") {
  TestServer server(fresh_dir("gate"));
  auto c = server.client();
  json products = json::array();
  for (int id = 1; id <= 5; ++id) products.push_back({{"id", id}, {"dims", {8, 5, 6 + id}}});
  post(c, "/sessions", {{"id", "five"}, {"products", products}}, 201);
  for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}, {1, 5}, {2, 5}})
    post(c, "/sessions/five/comparisons", {{"i", i}, {"j", j}, {"value", 1}}, 200);
  const auto refused = post(c, "/sessions/five/stage1/complete", json::object(), 409);
  CHECK(refused.at("under_covered") == json::array({5}));
  post(c, "/sessions/five/comparisons", {{"i", 3}, {"j", 5}, {"value", 2}}, 200);
  const auto done = post(c, "/sessions/five/stage1/complete", json::object(), 200);
  CHECK(done.at("stage1").at("status") == "complete");
  put(c, "/sessions/five/appeal", {{"1", 11}, {"2", 1}, {"3", 1}, {"4", 1}, {"5", 1}}, 422);
}

TEST_CASE("profile images") {
  TestServer server(fresh_dir("profile"));
  auto c = server.client();
  const auto r = c.Get("/products/7/profile.svg?rule=R2&delta=0.5");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Content-Type") == "image/svg+xml");
  CHECK(r->body.find("<svg") != std::string::npos);
  CHECK(c.Get("/products/7/profile.svg")->body != r->body);
  CHECK(c.Get("/products/99/profile.svg")->status == 404);
  CHECK(c.Get("/products/7/profile.svg?rule=R9")->status == 422);
  CHECK(c.Get("/products/7/profile.svg?rule=R2&delta=abc")->status == 400);
  CHECK(c.Get("/products/7/profile.svg?rule=R3&delta=-1")->status == 422);
}

TEST_CASE("analysis through the service equals the analysis of the bundled files") {
  const auto dir = fresh_dir("analyze");
  TestServer server(dir);
  auto c = server.client();
  post(c, "/sessions", {{"id", "full"}}, 201);
  fill_from_fixtures(c, "full");
  const auto r = c.Post("/sessions/full/analyze", R"({"k": 2, "seed": 0})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->body == report_text(run_pipeline(load_pipeline_inputs(fixture_dir()))));

  const auto with = c.Post("/sessions/full/analyze?artifacts=1", "{}", "application/json");
  REQUIRE(with);
  const auto j = json::parse(with->body);
  CHECK(j.at("artifacts").contains("colormap.svg"));

  // The stored session file feeds the command-line report unchanged.
  const auto out = dir / "cli_out";
  const std::string cmd = std::string("\"") + FORMSENSE_CLI + "\" report --session \"" +
                          (dir / "full" / "session.json").string() + "\" --out \"" + out.string() + "\" > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(read_file(out / "report.json") == r->body);
}

TEST_CASE("concurrent writers do not lose comparisons") {
  TestServer server(fresh_dir("concurrency"));
  auto c = server.client();
  post(c, "/sessions", {{"id", "busy"}}, 201);
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t) {
    writers.emplace_back([&server, t] {
      auto local = server.client();
      for (int j = 2; j <= 18; ++j) {
        if (j % 4 != t) continue;
        const json body{{"i", 1}, {"j", j}, {"value", j % 4}};
        local.Post("/sessions/busy/comparisons", body.dump(), "application/json");
      }
    });
  }
  for (auto& w : writers) w.join();
  const auto cov = json::parse(c.Get("/sessions/busy/coverage")->body);
  CHECK(cov.at("coverage").at("1") == 17);
  const auto session = json::parse(c.Get("/sessions/busy")->body);
  CHECK(session.at("audit").size() == 17);
}

TEST_CASE("sessions survive a restart") {
  const auto dir = fresh_dir("persist");
  {
    TestServer server(dir);
    auto c = server.client();
    post(c, "/sessions", {{"id", "keep"}}, 201);
    post(c, "/sessions/keep/comparisons", {{"i", 3}, {"j", 4}, {"value", 2}}, 200);
  }
  TestServer again(dir);
  auto c = again.client();
  const auto cov = json::parse(c.Get("/sessions/keep/coverage")->body);
  CHECK(cov.at("coverage").at("3") == 1);
  CHECK(json::parse(c.Get("/sessions/keep")->body).at("audit").size() == 1);
  const auto next = post(c, "/sessions", json::object(), 201);
  CHECK(next.at("id") == "s0001");
}
