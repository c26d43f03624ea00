#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formsense/appeal.hpp"
#include "formsense/session.hpp"
#include "formsense/surface.hpp"
#include "formsense/types.hpp"
#include "json.hpp"

namespace formsense {

struct PipelineInputs {
  SparseDissimilarityMatrix matrix;
  AppealScores appeal;
  RuleAssessmentSet rules;
  DimsTable dims;
  /// Published coefficient set to compare the fit against, when available.
  std::optional<AppealModel> reference;
};

/// Reads dissim.csv, appeal.csv, rules.csv and, if present, reference_model.json.
PipelineInputs load_pipeline_inputs(const std::filesystem::path& dir);
/// Requires every stage of the session to be complete.
PipelineInputs inputs_from_session(const Session& session, std::optional<AppealModel> reference = std::nullopt);

struct PipelineOptions {
  std::uint64_t seed = 0;
  int k = 2;
  int mds_restarts = 20;
  int fit_starts = 50;
  bool k_nonneg = false;
  GradientForm gradient_form = GradientForm::Exact;
  std::optional<double> fixed_d1;   // defaults to the median d1 of the data
  std::optional<Interval> d2_range; // defaults to the data's d2 span
  std::optional<Interval> d3_range;
  int resolution = 50;
  std::vector<double> iso_levels;   // defaults to round values inside the surface range
  std::vector<double> significance_levels{0.01, 0.05};
};

/// Report plus named artifacts (file name -> content). Nothing in either depends
/// on time, paths or thread scheduling.
struct PipelineReport {
  nlohmann::json json;
  std::map<std::string, std::string> artifacts;
};

PipelineReport run_pipeline(const PipelineInputs& inputs, const PipelineOptions& options = {});

/// Serialised report as written to report.json.
std::string report_text(const PipelineReport& report);

}  // namespace formsense
