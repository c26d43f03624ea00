#include "formsense/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "formsense/error.hpp"

namespace formsense {

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
  }
  return "?";
}

std::optional<Rule> parse_rule(std::string_view text) {
  if (text == "R1" || text == "r1") return Rule::R1;
  if (text == "R2" || text == "r2") return Rule::R2;
  if (text == "R3" || text == "r3") return Rule::R3;
  return std::nullopt;
}

std::optional<int> SparseDissimilarityMatrix::value(int i, int j) const {
  if (i > j) std::swap(i, j);
  for (const auto& e : entries)
    if (e.i == i && e.j == j) return e.value;
  return std::nullopt;
}

std::vector<int> SparseDissimilarityMatrix::coverage() const {
  std::vector<int> counts(static_cast<std::size_t>(std::max(n, 0)), 0);
  for (const auto& e : entries) {
    if (e.i == e.j) continue;
    if (e.i >= 1 && e.i <= n) ++counts[e.i - 1];
    if (e.j >= 1 && e.j <= n) ++counts[e.j - 1];
  }
  return counts;
}

ValidationReport validate_dissimilarity(const SparseDissimilarityMatrix& matrix) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, int i, int j, std::string message) {
    report.violations.push_back({kind, i, j, std::move(message)});
  };
  for (const auto& e : matrix.entries) {
    const std::string pair = "(" + std::to_string(e.i) + "," + std::to_string(e.j) + ")";
    if (e.i < 1 || e.j < 1 || e.i > matrix.n || e.j > matrix.n)
      add(Violation::Kind::UnknownProduct, e.i, e.j, "pair " + pair + " names an unknown product");
    if (e.i == e.j) add(Violation::Kind::SelfPair, e.i, e.j, "self-pair " + pair);
    if (e.value < 0 || e.value > kMaxDissimilarity)
      add(Violation::Kind::ValueOutOfRange, e.i, e.j,
          "value out of 0..3 at " + pair + ": " + std::to_string(e.value));
  }
  const auto counts = matrix.coverage();
  for (int id = 1; id <= matrix.n; ++id) {
    const int c = counts[id - 1];
    if (c < kMinComparisons)
      add(Violation::Kind::Coverage, id, 0,
          "coverage(" + std::to_string(id) + ")=" + std::to_string(c) + " < 3");
  }
  return report;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct CsvRow {
  int line = 0;
  std::vector<std::string_view> cells;
};

std::vector<CsvRow> split_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  int line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    raw = trim(raw);
    if (raw.empty() || raw.front() == '#') continue;
    CsvRow row{line, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = raw.find(',', start);
      row.cells.push_back(trim(raw.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int parse_int(std::string_view s, int line, const char* what) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError(std::string("expected integer ") + what + ", got '" + std::string(s) + "'", line);
  return value;
}

double parse_double(std::string_view s, int line, const char* what) {
  // Decimal commas cannot occur inside a CSV cell, so only '.' is accepted.
  std::string buf(s);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(value))
    throw ParseError(std::string("expected number ") + what + ", got '" + buf + "'", line);
  return value;
}

void expect_header(const CsvRow& row, std::initializer_list<std::string_view> names) {
  std::size_t k = 0;
  for (auto name : names) {
    if (k >= row.cells.size() || row.cells[k] != name) {
      std::string expected;
      for (auto n : names) expected += (expected.empty() ? "" : ",") + std::string(n);
      throw ParseError("header must start with '" + expected + "'", row.line);
    }
    ++k;
  }
}

}  // namespace

SparseDissimilarityMatrix load_matrix(std::string_view csv) {
  const auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError("empty dissimilarity matrix");
  const auto& header = rows.front();
  const int n = static_cast<int>(header.cells.size()) - 1;
  if (n < 2) throw ParseError("matrix needs at least 2 products", header.line);
  for (int c = 1; c <= n; ++c)
    if (parse_int(header.cells[c], header.line, "product id") != c)
      throw ParseError("header ids must be 1..N in order", header.line);
  if (static_cast<int>(rows.size()) != n + 1)
    throw ParseError("expected " + std::to_string(n) + " data rows, found " +
                     std::to_string(rows.size() - 1));

  // cells[r][c], -1 for '*'
  std::vector<std::vector<int>> cells(n, std::vector<int>(n, -1));
  for (int r = 1; r <= n; ++r) {
    const auto& row = rows[r];
    if (static_cast<int>(row.cells.size()) != n + 1)
      throw ParseError("expected " + std::to_string(n + 1) + " cells", row.line);
    if (parse_int(row.cells[0], row.line, "row id") != r)
      throw ParseError("row ids must be 1..N in order", row.line);
    for (int c = 1; c <= n; ++c) {
      const auto cell = row.cells[c];
      if (cell == "*") continue;
      const int v = parse_int(cell, row.line, "dissimilarity");
      if (v < 0) throw RangeError("negative dissimilarity", row.line);
      cells[r - 1][c - 1] = v;
    }
  }
  SparseDissimilarityMatrix m;
  m.n = n;
  for (int i = 0; i < n; ++i) {
    if (cells[i][i] != 0) throw NonZeroDiagonal(i + 1);
    for (int j = i + 1; j < n; ++j) {
      if (cells[i][j] != cells[j][i]) throw AsymmetryError(i + 1, j + 1);
      if (cells[i][j] >= 0) m.entries.push_back({i + 1, j + 1, cells[i][j]});
    }
  }
  return m;
}

AppealScores load_appeal(std::string_view csv) {
  const auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError("empty appeal table");
  expect_header(rows.front(), {"id", "score"});
  AppealScores scores;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cells.size() != 2) throw ParseError("expected 2 cells", row.line);
    const int id = parse_int(row.cells[0], row.line, "id");
    const double score = parse_double(row.cells[1], row.line, "score");
    if (id < 1) throw RangeError("product ids start at 1", row.line);
    if (score < 0.0 || score > 10.0) throw RangeError("score out of 0..10", row.line);
    if (!scores.emplace(id, score).second) throw ParseError("duplicate id " + std::to_string(id), row.line);
  }
  return scores;
}

DimsTable load_dims(std::string_view csv) {
  const auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError("empty dimensions table");
  expect_header(rows.front(), {"id", "d1", "d2", "d3"});
  DimsTable dims;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cells.size() < 4) throw ParseError("expected at least 4 cells", row.line);
    const int id = parse_int(row.cells[0], row.line, "id");
    DesignParams p{parse_double(row.cells[1], row.line, "d1"), parse_double(row.cells[2], row.line, "d2"),
                   parse_double(row.cells[3], row.line, "d3")};
    if (id < 1) throw RangeError("product ids start at 1", row.line);
    if (!p.positive()) throw RangeError("dimensions must be strictly positive", row.line);
    if (!dims.emplace(id, p).second) throw ParseError("duplicate id " + std::to_string(id), row.line);
  }
  return dims;
}

RuleAssessmentSet load_rules(std::string_view csv) {
  const auto rows = split_csv(csv);
  if (rows.empty()) throw ParseError("empty rule table");
  expect_header(rows.front(), {"id", "d1", "d2", "d3", "R1", "R2", "R3"});
  RuleAssessmentSet rules;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cells.size() != 7) throw ParseError("expected 7 cells", row.line);
    const int id = parse_int(row.cells[0], row.line, "id");
    if (id < 1) throw RangeError("product ids start at 1", row.line);
    std::array<int, 3> codes{};
    for (int j = 0; j < 3; ++j) {
      codes[j] = parse_int(row.cells[4 + j], row.line, "rule code");
      if (codes[j] < -1 || codes[j] > 1) throw RangeError("rule code must be -1, 0 or 1", row.line);
    }
    if (!rules.emplace(id, codes).second) throw ParseError("duplicate id " + std::to_string(id), row.line);
  }
  return rules;
}

std::string serialize_matrix(const SparseDissimilarityMatrix& matrix) {
  const int n = matrix.n;
  std::vector<std::vector<int>> cells(n, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i) cells[i][i] = 0;
  for (const auto& e : matrix.entries) cells[e.i - 1][e.j - 1] = cells[e.j - 1][e.i - 1] = e.value;
  std::string out = "id";
  for (int c = 1; c <= n; ++c) out += "," + std::to_string(c);
  out += '\n';
  for (int r = 0; r < n; ++r) {
    out += std::to_string(r + 1);
    for (int c = 0; c < n; ++c) out += "," + (cells[r][c] < 0 ? std::string("*") : std::to_string(cells[r][c]));
    out += '\n';
  }
  return out;
}

std::string serialize_appeal(const AppealScores& scores) {
  std::string out = "id,score\n";
  for (const auto& [id, score] : scores) out += std::to_string(id) + "," + format_number(score) + "\n";
  return out;
}

std::string serialize_rules(const RuleAssessmentSet& rules, const DimsTable& dims) {
  std::string out = "id,d1,d2,d3,R1,R2,R3\n";
  for (const auto& [id, codes] : rules) {
    const auto it = dims.find(id);
    if (it == dims.end()) throw InvalidInput("no dimensions for product " + std::to_string(id));
    const auto& p = it->second;
    out += std::to_string(id) + "," + format_number(p.d1) + "," + format_number(p.d2) + "," +
           format_number(p.d3);
    for (int c : codes) out += "," + std::to_string(c);
    out += '\n';
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("IOError", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("FORMSENSE_FIXTURES"); env != nullptr && *env != '\0') return env;
  return FORMSENSE_DEFAULT_FIXTURES;
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, decimals);
  std::string s(buf, ptr);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace formsense
