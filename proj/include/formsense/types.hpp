#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace formsense {

/// Glass dimensions in cm: d1 container height, d2 foot height, d3 container diameter.
struct DesignParams {
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;

  double operator[](std::size_t j) const { return j == 0 ? d1 : (j == 1 ? d2 : d3); }
  double& operator[](std::size_t j) { return j == 0 ? d1 : (j == 1 ? d2 : d3); }
  bool positive() const { return d1 > 0.0 && d2 > 0.0 && d3 > 0.0; }
  friend bool operator==(const DesignParams&, const DesignParams&) = default;
};

/// Shape-regulating rules; each increases one design parameter.
enum class Rule { R1 = 0, R2 = 1, R3 = 2 };

inline constexpr std::array<Rule, 3> kRules{Rule::R1, Rule::R2, Rule::R3};

std::string_view to_string(Rule rule);
std::optional<Rule> parse_rule(std::string_view text);

struct Product {
  int id = 0;
  std::string label;
  DesignParams dims;
};

struct DissimilarityEntry {
  int i = 0;
  int j = 0;
  int value = 0;
  friend bool operator==(const DissimilarityEntry&, const DissimilarityEntry&) = default;
};

/// Observed pairs of a partially filled dissimilarity matrix. Entries are kept
/// with i < j; unobserved pairs are simply absent.
struct SparseDissimilarityMatrix {
  int n = 0;
  std::vector<DissimilarityEntry> entries;

  std::optional<int> value(int i, int j) const;
  /// Number of observed pairs each product takes part in, indexed by id - 1.
  std::vector<int> coverage() const;
};

/// Hedonic score on [0, 10] per product id.
using AppealScores = std::map<int, double>;

/// Per product id, the coded appeal change {-1, 0, +1} for rules R1..R3.
using RuleAssessmentSet = std::map<int, std::array<int, 3>>;

using DimsTable = std::map<int, DesignParams>;

}  // namespace formsense
