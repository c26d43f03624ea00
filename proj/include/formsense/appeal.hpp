#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "formsense/types.hpp"
#include "json.hpp"

namespace formsense {

inline constexpr std::size_t kCoefficients = 10;

/// Quadratic appeal model in (d1, d2, d3):
///   P = a1 d1 + a2 d2 + a3 d3 + a4 d1^2 + a5 d2^2 + a6 d3^2
///     + a7 d1 d2 + a8 d1 d3 + a9 d2 d3 + a10
/// plus one factor per rule relating the model's partial derivative to the
/// subject's {-1, 0, +1} code for that rule.
struct AppealModel {
  std::array<double, kCoefficients> a{};
  std::array<double, 3> k{};
};

/// Subject data for one glass.
struct Observation {
  DesignParams dims;
  double appeal = 0.0;
  std::array<int, 3> deltas{};
};

/// `Exact` is the true gradient of the quadratic. `AsPrinted` reproduces the
/// published derivative formulas literally, which scale the cross terms by the
/// differentiation variable; it exists for comparison runs only.
enum class GradientForm { Exact, AsPrinted };

using FeatureRow = std::array<double, kCoefficients>;

/// Monomials multiplying a1..a10.
FeatureRow appeal_features(const DesignParams& d);
/// Row j holds the coefficients of a1..a10 in dP/dd_{j+1}.
std::array<FeatureRow, 3> gradient_features(const DesignParams& d, GradientForm form = GradientForm::Exact);

double predict_appeal(const AppealModel& model, const DesignParams& dims);
std::array<double, 3> appeal_gradient(const AppealModel& model, const DesignParams& dims,
                                      GradientForm form = GradientForm::Exact);

struct ObjectiveTerms {
  double appeal = 0.0;      // sum (P_i - Pbar_i)^2
  double derivative = 0.0;  // sum (dP_ij - k_j dPbar_i/dd_j)^2
  double total() const { return appeal + derivative; }
};

ObjectiveTerms objective_terms(const AppealModel& model, const std::vector<Observation>& observations,
                               GradientForm form = GradientForm::Exact);
double objective(const AppealModel& model, const std::vector<Observation>& observations,
                 GradientForm form = GradientForm::Exact);

/// Least-squares optimal k for fixed a (three independent scalar problems).
std::array<double, 3> optimal_k(const std::array<double, kCoefficients>& a, const std::vector<Observation>& observations,
                                GradientForm form = GradientForm::Exact, bool k_nonneg = false);

struct FitOptions {
  int starts = 50;
  std::uint64_t seed = 0;
  double ridge = 1e-6;  // on a1..a9; the intercept is not penalised
  bool k_nonneg = false;
  GradientForm gradient_form = GradientForm::Exact;
  int max_alternations = 5000;
  double tolerance = 1e-13;  // relative objective decrease that ends the alternation
  double k_init_range = 2.0; // starting k drawn from U(-range, range), or U(0, range) with k_nonneg
  bool polish = true;        // Levenberg-Marquardt on the unregularised objective
  int polish_iterations = 200;
};

/// Column groups the data cannot separate, found from the null space of the
/// stacked design at the fitted k.
struct IdentifiabilityReport {
  std::vector<std::string> constant_columns;             // design parameters with no variation
  std::vector<std::vector<std::string>> collinear_groups;
  double condition_number = 0.0;
};

struct AppealFit {
  AppealModel model;
  double objective = 0.0;
  ObjectiveTerms terms;
  std::vector<double> appeal_residuals;                  // per observation
  std::vector<std::array<double, 3>> derivative_residuals;
  int starts = 0;
  int best_start = 0;
  int alternations = 0;   // of the winning start
  int polish_iterations = 0;
  bool converged = false;
  IdentifiabilityReport identifiability;
};

/// Multi-start alternating least squares (a by ridge least squares at fixed k,
/// k in closed form at fixed a), optionally polished. Starts run in parallel.
AppealFit fit_appeal_model(const std::vector<Observation>& observations, const FitOptions& options = {});
/// Serial reference; bit-identical to fit_appeal_model.
AppealFit fit_appeal_model_reference(const std::vector<Observation>& observations, const FitOptions& options = {});

/// Joins appeal scores, rule codes and dimensions by product id.
std::vector<Observation> make_observations(const AppealScores& appeal, const RuleAssessmentSet& rules,
                                           const DimsTable& dims);

AppealModel load_model(const nlohmann::json& j);
nlohmann::json model_json(const AppealModel& model);
nlohmann::json fit_json(const AppealFit& fit, GradientForm form);

inline const std::array<const char*, kCoefficients> kCoefficientTerms{"d1", "d2", "d3", "d1^2", "d2^2",
                                                                      "d3^2", "d1*d2", "d1*d3", "d2*d3", "1"};

}  // namespace formsense
