#include "formsense/session.hpp"

#include <algorithm>

#include "formsense/error.hpp"
#include "formsense/io.hpp"

namespace formsense {

namespace {

std::string join_ids(const std::vector<int>& ids) {
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ", ") + std::to_string(id);
  return s;
}

const char* status_name(StageStatus s) { return s == StageStatus::Complete ? "complete" : "open"; }

StageStatus parse_status(const std::string& s) {
  if (s == "complete") return StageStatus::Complete;
  if (s == "open") return StageStatus::Open;
  throw ParseError("unknown stage status '" + s + "'");
}

}  // namespace

CoverageError::CoverageError(std::vector<int> under_covered)
    : Error("CoverageError", "products with fewer than 3 comparisons: " + join_ids(under_covered)),
      under_covered_(std::move(under_covered)) {}

Session::Session(std::string id, std::vector<Product> products)
    : id_(std::move(id)), products_(std::move(products)) {
  if (products_.size() < 2) throw InvalidInput("a session needs at least 2 products");
  for (std::size_t k = 0; k < products_.size(); ++k) {
    if (products_[k].id != static_cast<int>(k) + 1)
      throw InvalidInput("product ids must be contiguous from 1");
    if (!products_[k].dims.positive())
      throw RangeError("product " + std::to_string(products_[k].id) + " has non-positive dimensions");
  }
  stage1_.n = product_count();
}

StageStatus Session::stage_status(int stage) const {
  if (stage < 1 || stage > 3) throw InvalidInput("stages are numbered 1..3");
  return status_[stage - 1];
}

bool Session::all_complete() const {
  return std::all_of(status_.begin(), status_.end(), [](StageStatus s) { return s == StageStatus::Complete; });
}

void Session::check_product(int id) const {
  if (id < 1 || id > product_count()) throw NotFound("unknown product " + std::to_string(id));
}

void Session::add_comparison(int i, int j, int value) {
  if (status_[0] == StageStatus::Complete) throw StageOrderError("stage 1 is already complete");
  check_product(i);
  check_product(j);
  if (i == j) throw RangeError("a product cannot be compared with itself");
  if (value < 0 || value > kMaxDissimilarity) throw RangeError("dissimilarity must be in 0..3");
  if (i > j) std::swap(i, j);
  auto it = std::find_if(stage1_.entries.begin(), stage1_.entries.end(),
                         [&](const DissimilarityEntry& e) { return e.i == i && e.j == j; });
  std::optional<int> previous;
  if (it != stage1_.entries.end()) {
    previous = it->value;
    it->value = value;
  } else {
    const auto pos = std::lower_bound(stage1_.entries.begin(), stage1_.entries.end(), DissimilarityEntry{i, j, 0},
                                      [](const auto& a, const auto& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
    stage1_.entries.insert(pos, {i, j, value});
  }
  audit_.push_back({i, j, previous, value});
}

std::vector<int> Session::under_covered() const {
  std::vector<int> ids;
  const auto counts = coverage();
  for (int id = 1; id <= product_count(); ++id)
    if (counts[id - 1] < kMinComparisons) ids.push_back(id);
  return ids;
}

void Session::complete_stage1() {
  if (status_[0] == StageStatus::Complete) return;
  if (auto missing = under_covered(); !missing.empty()) throw CoverageError(std::move(missing));
  status_[0] = StageStatus::Complete;
}

void Session::set_appeal(const AppealScores& scores) {
  if (status_[0] != StageStatus::Complete)
    throw StageOrderError("stage 2 requires stage 1 to be complete");
  if (status_[2] == StageStatus::Complete) throw StageOrderError("stage 3 is already complete");
  for (const auto& [id, score] : scores) {
    check_product(id);
    if (!(score >= 0.0 && score <= 10.0)) throw RangeError("score for product " + std::to_string(id) + " out of 0..10");
  }
  for (int id = 1; id <= product_count(); ++id)
    if (!scores.count(id)) throw RangeError("missing score for product " + std::to_string(id));
  stage2_ = scores;
  status_[1] = StageStatus::Complete;
}

void Session::set_rules(const RuleAssessmentSet& rules) {
  if (status_[1] != StageStatus::Complete)
    throw StageOrderError("stage 3 requires stage 2 to be complete");
  for (const auto& [id, codes] : rules) {
    check_product(id);
    for (int c : codes)
      if (c < -1 || c > 1) throw RangeError("rule codes for product " + std::to_string(id) + " must be -1, 0 or 1");
  }
  for (int id = 1; id <= product_count(); ++id)
    if (!rules.count(id)) throw RangeError("missing rule codes for product " + std::to_string(id));
  stage3_ = rules;
  status_[2] = StageStatus::Complete;
}

DimsTable Session::dims() const {
  DimsTable t;
  for (const auto& p : products_) t.emplace(p.id, p.dims);
  return t;
}

nlohmann::json Session::to_json() const {
  using nlohmann::json;
  json products = json::array();
  for (const auto& p : products_)
    products.push_back({{"id", p.id}, {"label", p.label}, {"dims", {p.dims.d1, p.dims.d2, p.dims.d3}}});
  json comparisons = json::array();
  for (const auto& e : stage1_.entries) comparisons.push_back({e.i, e.j, e.value});
  json out = {{"id", id_},
              {"products", products},
              {"stage1", {{"status", status_name(status_[0])}, {"comparisons", comparisons}}}};
  json stage2 = {{"status", status_name(status_[1])}};
  if (stage2_) {
    json scores = json::object();
    for (const auto& [id, s] : *stage2_) scores[std::to_string(id)] = s;
    stage2["appeal"] = scores;
  }
  json stage3 = {{"status", status_name(status_[2])}};
  if (stage3_) {
    json codes = json::object();
    for (const auto& [id, c] : *stage3_) codes[std::to_string(id)] = {c[0], c[1], c[2]};
    stage3["rules"] = codes;
  }
  out["stage2"] = stage2;
  out["stage3"] = stage3;
  json audit = json::array();
  for (const auto& a : audit_)
    audit.push_back({{"i", a.i}, {"j", a.j}, {"previous", a.previous ? json(*a.previous) : json(nullptr)}, {"value", a.value}});
  out["audit"] = audit;
  return out;
}

Session Session::from_json(const nlohmann::json& j) {
  try {
    std::vector<Product> products;
    for (const auto& p : j.at("products")) {
      const auto& d = p.at("dims");
      products.push_back({p.at("id").get<int>(), p.value("label", std::string{}),
                          {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()}});
    }
    Session s(j.at("id").get<std::string>(), std::move(products));
    for (const auto& c : j.at("stage1").at("comparisons")) {
      const int a = c.at(0).get<int>(), b = c.at(1).get<int>(), v = c.at(2).get<int>();
      s.check_product(a);
      s.check_product(b);
      if (a == b || v < 0 || v > kMaxDissimilarity) throw RangeError("invalid stored comparison");
      s.stage1_.entries.push_back({std::min(a, b), std::max(a, b), v});
    }
    std::sort(s.stage1_.entries.begin(), s.stage1_.entries.end(),
              [](const auto& x, const auto& y) { return std::pair(x.i, x.j) < std::pair(y.i, y.j); });
    s.status_[0] = parse_status(j.at("stage1").at("status").get<std::string>());
    if (j.contains("stage2") && j["stage2"].contains("appeal")) {
      AppealScores scores;
      for (const auto& [key, v] : j["stage2"]["appeal"].items()) scores[std::stoi(key)] = v.get<double>();
      s.stage2_ = scores;
    }
    if (j.contains("stage2")) s.status_[1] = parse_status(j["stage2"].at("status").get<std::string>());
    if (j.contains("stage3") && j["stage3"].contains("rules")) {
      RuleAssessmentSet rules;
      for (const auto& [key, v] : j["stage3"]["rules"].items())
        rules[std::stoi(key)] = {v.at(0).get<int>(), v.at(1).get<int>(), v.at(2).get<int>()};
      s.stage3_ = rules;
    }
    if (j.contains("stage3")) s.status_[2] = parse_status(j["stage3"].at("status").get<std::string>());
    if (s.status_[1] == StageStatus::Complete && s.status_[0] != StageStatus::Complete)
      throw StageOrderError("stored session has stage 2 complete before stage 1");
    if (s.status_[2] == StageStatus::Complete && s.status_[1] != StageStatus::Complete)
      throw StageOrderError("stored session has stage 3 complete before stage 2");
    if (j.contains("audit")) {
      for (const auto& a : j["audit"]) {
        AuditRecord r{a.at("i").get<int>(), a.at("j").get<int>(), std::nullopt, a.at("value").get<int>()};
        if (!a.at("previous").is_null()) r.previous = a["previous"].get<int>();
        s.audit_.push_back(r);
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed session json: ") + e.what());
  }
}

Session session_from_tables(std::string id, const SparseDissimilarityMatrix& matrix,
                            const AppealScores& appeal, const RuleAssessmentSet& rules,
                            const DimsTable& dims) {
  std::vector<Product> products;
  for (int k = 1; k <= matrix.n; ++k) {
    const auto it = dims.find(k);
    if (it == dims.end()) throw InvalidInput("no dimensions for product " + std::to_string(k));
    products.push_back({k, "G" + std::to_string(k), it->second});
  }
  Session s(std::move(id), std::move(products));
  for (const auto& e : matrix.entries) s.add_comparison(e.i, e.j, e.value);
  s.complete_stage1();
  s.set_appeal(appeal);
  s.set_rules(rules);
  return s;
}

}  // namespace formsense
