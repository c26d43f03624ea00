#include "formsense/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <regex>

#include "formsense/error.hpp"
#include "formsense/geometry.hpp"
#include "formsense/io.hpp"
#include "formsense/pipeline.hpp"

namespace formsense {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool valid_id(const std::string& id) {
  static const std::regex kPattern("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, kPattern);
}

}  // namespace

SessionStore::SessionStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const auto file = entry.path() / "session.json";
    if (!entry.is_directory() || !fs::exists(file)) continue;
    auto e = std::make_shared<Entry>();
    e->session = Session::from_json(json::parse(read_file(file)));
    const auto& id = e->session.id();
    if (id.size() > 1 && id[0] == 's' && std::all_of(id.begin() + 1, id.end(), ::isdigit))
      next_id_ = std::max(next_id_, std::stoi(id.substr(1)) + 1);
    sessions_[id] = std::move(e);
  }
}

std::string SessionStore::create(std::optional<std::string> id, std::vector<Product> products) {
  std::lock_guard lock(map_mutex_);
  if (!id) {
    do {
      char buf[16];
      std::snprintf(buf, sizeof buf, "s%04d", next_id_++);
      id = buf;
    } while (sessions_.count(*id));
  }
  if (!valid_id(*id)) throw InvalidInput("session ids use letters, digits, '-' and '_' (at most 64)");
  if (sessions_.count(*id)) throw AlreadyExists("session '" + *id + "' already exists");
  auto e = std::make_shared<Entry>();
  e->session = Session(*id, std::move(products));
  persist(e->session);
  sessions_[*id] = std::move(e);
  return *id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(map_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return it->second;
}

Session SessionStore::get(const std::string& id) const {
  const auto e = find(id);
  std::lock_guard lock(e->mutex);
  return e->session;
}

void SessionStore::update(const std::string& id, const std::function<void(Session&)>& change) {
  const auto e = find(id);
  std::lock_guard lock(e->mutex);
  Session copy = e->session;
  change(copy);
  persist(copy);
  e->session = std::move(copy);
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

void SessionStore::persist(const Session& s) const {
  const auto dir = dir_ / s.id();
  fs::create_directories(dir);
  const auto tmp = dir / "session.json.tmp";
  write_file(tmp, s.to_json().dump(2) + "\n");
  fs::rename(tmp, dir / "session.json");
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message,
                json extra = json::object()) {
  extra["error"] = kind;
  extra["message"] = message;
  send_json(res, extra, status);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const CoverageError& e) {
      send_error(res, 409, e.kind(), e.what(), {{"under_covered", e.under_covered()}});
    } catch (const StageOrderError& e) {
      send_error(res, 409, e.kind(), e.what());
    } catch (const AlreadyExists& e) {
      send_error(res, 409, e.kind(), e.what());
    } catch (const NotFound& e) {
      send_error(res, 404, e.kind(), e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.kind(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "ParseError", e.what());
    } catch (const Error& e) {
      send_error(res, 422, e.kind(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  auto j = json::parse(req.body);
  if (!j.is_object()) throw ParseError("request body must be a JSON object");
  return j;
}

int id_from_key(const std::string& key) {
  std::size_t used = 0;
  int id = 0;
  try {
    id = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size()) throw ParseError("'" + key + "' is not a product id");
  return id;
}

std::vector<Product> parse_products(const json& list) {
  if (!list.is_array()) throw ParseError("products must be an array");
  std::vector<Product> out;
  for (const auto& p : list) {
    const auto& d = p.at("dims");
    if (!d.is_array() || d.size() != 3) throw ParseError("dims must be [d1, d2, d3]");
    out.push_back({p.at("id").get<int>(), p.value("label", std::string{}),
                   {d[0].get<double>(), d[1].get<double>(), d[2].get<double>()}});
  }
  return out;
}

struct Catalogue {
  ProfileTemplate tmpl = canonical_template();
  DimsTable dims;
  std::optional<AppealModel> reference;
};

Catalogue load_catalogue(const fs::path& dir) {
  Catalogue c;
  if (dir.empty()) return c;
  if (fs::exists(dir / "template.json")) c.tmpl = load_template(read_file(dir / "template.json"));
  if (fs::exists(dir / "rules.csv")) c.dims = load_dims(read_file(dir / "rules.csv"));
  if (fs::exists(dir / "reference_model.json"))
    c.reference = load_model(json::parse(read_file(dir / "reference_model.json")));
  return c;
}

json coverage_json(const Session& s) {
  json counts = json::object();
  const auto cov = s.coverage();
  for (std::size_t k = 0; k < cov.size(); ++k) counts[std::to_string(k + 1)] = cov[k];
  return {{"coverage", counts},
          {"under_covered", s.under_covered()},
          {"minimum", kMinComparisons},
          {"stage1_complete", s.stage_status(1) == StageStatus::Complete}};
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store, const ServiceConfig& config) {
  auto catalogue = std::make_shared<const Catalogue>(load_catalogue(config.fixture_dir));

  server.Post("/sessions", guarded([&store, catalogue](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    std::optional<std::string> id;
    if (body.contains("id")) id = body["id"].get<std::string>();
    std::vector<Product> products;
    if (body.contains("products")) {
      products = parse_products(body["products"]);
    } else {
      for (const auto& [pid, d] : catalogue->dims) products.push_back({pid, "G" + std::to_string(pid), d});
    }
    const auto created = store.create(id, std::move(products));
    send_json(res, store.get(created).to_json(), 201);
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_-]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, store.get(req.matches[1]).to_json());
  }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/comparisons)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const int i = body.at("i").get<int>(), j = body.at("j").get<int>();
                const int value = body.at("value").get<int>();
                Session after;
                store.update(req.matches[1], [&](Session& s) {
                  s.add_comparison(i, j, value);
                  after = s;
                });
                send_json(res, coverage_json(after));
              }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/stage1/complete)",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                store.update(req.matches[1], [](Session& s) { s.complete_stage1(); });
                send_json(res, store.get(req.matches[1]).to_json());
              }));

  server.Put(R"(/sessions/([A-Za-z0-9_-]+)/appeal)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    AppealScores scores;
    for (const auto& [key, v] : body.items()) scores[id_from_key(key)] = v.get<double>();
    store.update(req.matches[1], [&](Session& s) { s.set_appeal(scores); });
    send_json(res, store.get(req.matches[1]).to_json());
  }));

  server.Put(R"(/sessions/([A-Za-z0-9_-]+)/rules)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    RuleAssessmentSet rules;
    for (const auto& [key, v] : body.items()) {
      if (!v.is_array() || v.size() != 3) throw ParseError("rule codes must be [R1, R2, R3]");
      rules[id_from_key(key)] = {v[0].get<int>(), v[1].get<int>(), v[2].get<int>()};
    }
    store.update(req.matches[1], [&](Session& s) { s.set_rules(rules); });
    send_json(res, store.get(req.matches[1]).to_json());
  }));

  server.Get(R"(/sessions/([A-Za-z0-9_-]+)/coverage)",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send_json(res, coverage_json(store.get(req.matches[1])));
             }));

  server.Get(R"(/products/(\d+)/profile\.svg)",
             guarded([&store, catalogue](const httplib::Request& req, httplib::Response& res) {
               const int id = id_from_key(req.matches[1]);
               std::optional<DesignParams> dims;
               if (req.has_param("session")) {
                 const auto s = store.get(req.get_param_value("session"));
                 if (id >= 1 && id <= s.product_count()) dims = s.products()[static_cast<std::size_t>(id - 1)].dims;
               } else if (const auto it = catalogue->dims.find(id); it != catalogue->dims.end()) {
                 dims = it->second;
               }
               if (!dims) throw NotFound("unknown product " + std::to_string(id));
               if (req.has_param("rule")) {
                 const auto rule = parse_rule(req.get_param_value("rule"));
                 if (!rule) throw RangeError("rule must be R1, R2 or R3");
                 double delta = default_rule_delta(*dims, *rule);
                 if (req.has_param("delta") && !req.get_param_value("delta").empty()) {
                   try {
                     delta = std::stod(req.get_param_value("delta"));
                   } catch (const std::exception&) {
                     throw ParseError("delta must be a number");
                   }
                 }
                 dims = apply_rule(*dims, *rule, delta);
               }
               res.set_content(profile_svg(generate_profile(catalogue->tmpl, *dims)), "image/svg+xml");
             }));

  server.Post(R"(/sessions/([A-Za-z0-9_-]+)/analyze)",
              guarded([&store, catalogue](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                PipelineOptions opt;
                opt.k = body.value("k", 2);
                opt.seed = body.value("seed", std::uint64_t{0});
                // Work on a snapshot so the session lock is not held during the analysis.
                const auto session = store.get(req.matches[1]);
                const auto report = run_pipeline(inputs_from_session(session, catalogue->reference), opt);
                if (req.has_param("artifacts") && req.get_param_value("artifacts") == "1") {
                  send_json(res, {{"report", report.json}, {"artifacts", report.artifacts}});
                } else {
                  res.status = 200;
                  res.set_content(report_text(report), "application/json");
                }
              }));

  if (config.static_dir) server.set_mount_point("/", config.static_dir->string());
}

int run_service(const std::string& host, int port, const ServiceConfig& config) {
  SessionStore store(config.data_dir);
  httplib::Server server;
  install_routes(server, store, config);
  if (!server.listen(host, port)) return 2;
  return 0;
}

}  // namespace formsense
