#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "formsense/types.hpp"

namespace formsense {

struct Violation {
  enum class Kind { ValueOutOfRange, Coverage, SelfPair, UnknownProduct };
  Kind kind;
  int i = 0;
  int j = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
};

inline constexpr int kMinComparisons = 3;
inline constexpr int kMaxDissimilarity = 3;

ValidationReport validate_dissimilarity(const SparseDissimilarityMatrix& matrix);

// CSV loaders. Parse problems raise ParseError / RangeError with the 1-based row.
SparseDissimilarityMatrix load_matrix(std::string_view csv);
AppealScores load_appeal(std::string_view csv);
RuleAssessmentSet load_rules(std::string_view csv);
/// Reads `id,d1,d2,d3[,...]`; extra columns (such as the rule codes) are ignored.
DimsTable load_dims(std::string_view csv);

std::string serialize_matrix(const SparseDissimilarityMatrix& matrix);
std::string serialize_appeal(const AppealScores& scores);
std::string serialize_rules(const RuleAssessmentSet& rules, const DimsTable& dims);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Fixture directory: $FORMSENSE_FIXTURES if set, the bundled fixtures otherwise.
std::filesystem::path fixture_dir();

/// Shortest representation that round-trips the double.
std::string format_number(double value);
/// Fixed-point with the given number of decimals, "-0" normalised to "0".
std::string format_fixed(double value, int decimals);

}  // namespace formsense
