#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "formsense/types.hpp"
#include "json.hpp"

namespace formsense {

enum class StageStatus { Open, Complete };

/// One revision of a dissimilarity judgment; `previous` is empty for the first rating.
struct AuditRecord {
  int i = 0;
  int j = 0;
  std::optional<int> previous;
  int value = 0;
};

/// A single subject's three-stage assessment. Stage 2 opens only after stage 1
/// is complete and stage 3 only after stage 2; the gating lives here so that the
/// CLI and the HTTP service enforce the same protocol.
class Session {
 public:
  Session() = default;
  Session(std::string id, std::vector<Product> products);

  const std::string& id() const { return id_; }
  const std::vector<Product>& products() const { return products_; }
  int product_count() const { return static_cast<int>(products_.size()); }

  StageStatus stage_status(int stage) const;
  bool all_complete() const;

  // Stage 1.
  void add_comparison(int i, int j, int value);
  const SparseDissimilarityMatrix& dissimilarities() const { return stage1_; }
  std::vector<int> coverage() const { return stage1_.coverage(); }
  std::vector<int> under_covered() const;
  void complete_stage1();

  // Stage 2: a complete map of scores closes the stage.
  void set_appeal(const AppealScores& scores);
  const std::optional<AppealScores>& appeal() const { return stage2_; }

  // Stage 3: a complete map of rule codes closes the stage.
  void set_rules(const RuleAssessmentSet& rules);
  const std::optional<RuleAssessmentSet>& rules() const { return stage3_; }

  DimsTable dims() const;
  const std::vector<AuditRecord>& audit() const { return audit_; }

  nlohmann::json to_json() const;
  static Session from_json(const nlohmann::json& j);

 private:
  void check_product(int id) const;

  std::string id_;
  std::vector<Product> products_;
  SparseDissimilarityMatrix stage1_;
  std::optional<AppealScores> stage2_;
  std::optional<RuleAssessmentSet> stage3_;
  std::array<StageStatus, 3> status_{StageStatus::Open, StageStatus::Open, StageStatus::Open};
  std::vector<AuditRecord> audit_;
};

/// Builds a session whose three stages hold exactly the given tables.
Session session_from_tables(std::string id, const SparseDissimilarityMatrix& matrix,
                            const AppealScores& appeal, const RuleAssessmentSet& rules,
                            const DimsTable& dims);

}  // namespace formsense
