#include "formsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "formsense/mds.hpp"
#include "formsense/plots.hpp"
#include "formsense/prefmap.hpp"
#include "formsense/svg.hpp"

namespace formsense {

namespace {

// Values published alongside the original single-subject study, kept for side-by-side comparison.
constexpr double kPublishedStress = 0.12;
constexpr double kPublishedR2 = 0.91;
constexpr double kPublishedF = 80.0;
constexpr double kPublishedIsoSlope = 0.5;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Interval span(const DimsTable& dims, std::size_t j) {
  Interval iv{dims.begin()->second[j], dims.begin()->second[j]};
  for (const auto& [id, d] : dims) {
    iv.lo = std::min(iv.lo, d[j]);
    iv.hi = std::max(iv.hi, d[j]);
  }
  return iv;
}

nlohmann::json slope_summary(const IsoAnalysis& iso) {
  std::vector<double> slopes;
  for (const auto& g : iso.gradient_field)
    if (g.iso_slope) slopes.push_back(*g.iso_slope);
  nlohmann::json j{{"samples", slopes.size()}, {"published_slope", kPublishedIsoSlope}};
  if (!slopes.empty()) {
    j["median"] = median(slopes);
    j["min"] = *std::min_element(slopes.begin(), slopes.end());
    j["max"] = *std::max_element(slopes.begin(), slopes.end());
    const auto near = std::count_if(slopes.begin(), slopes.end(), [](double s) { return s >= 0.25 && s <= 1.0; });
    j["fraction_within_0.25_to_1"] = static_cast<double>(near) / static_cast<double>(slopes.size());
  }
  return j;
}

nlohmann::json sign_pattern(const AppealModel& model, const std::vector<Observation>& obs, GradientForm form) {
  int d2_nonneg = 0, d3_nonpos = 0, r2_pos = 0, r3_neg = 0;
  for (const auto& o : obs) {
    const auto g = appeal_gradient(model, o.dims, form);
    d2_nonneg += g[1] >= 0.0;
    d3_nonpos += g[2] <= 0.0;
    r2_pos += o.deltas[1] == 1;
    r3_neg += o.deltas[2] == -1;
  }
  return {{"points", obs.size()},
          {"d2_gradient_nonnegative", d2_nonneg},
          {"d3_gradient_nonpositive", d3_nonpos},
          {"R2_coded_positive", r2_pos},
          {"R3_coded_negative", r3_neg}};
}

std::vector<double> default_levels(double lo, double hi) {
  std::vector<double> out;
  for (double v : svg::ticks(lo, hi, 8))
    if (v > lo && v < hi) out.push_back(v);
  return out;
}

}  // namespace

PipelineInputs load_pipeline_inputs(const std::filesystem::path& dir) {
  PipelineInputs in;
  in.matrix = load_matrix(read_file(dir / "dissim.csv"));
  in.appeal = load_appeal(read_file(dir / "appeal.csv"));
  const auto rules_text = read_file(dir / "rules.csv");
  in.rules = load_rules(rules_text);
  in.dims = load_dims(rules_text);
  const auto ref = dir / "reference_model.json";
  if (std::filesystem::exists(ref)) {
    try {
      in.reference = load_model(nlohmann::json::parse(read_file(ref)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(ref.filename().string() + ": " + e.what());
    }
  }
  return in;
}

PipelineInputs inputs_from_session(const Session& session, std::optional<AppealModel> reference) {
  if (!session.all_complete()) throw StageOrderError("analysis needs all three stages complete");
  PipelineInputs in;
  in.matrix = session.dissimilarities();
  in.appeal = *session.appeal();
  in.rules = *session.rules();
  in.dims = session.dims();
  in.reference = std::move(reference);
  return in;
}

PipelineReport run_pipeline(const PipelineInputs& in, const PipelineOptions& opt) {
  if (opt.k < 2) throw InvalidInput("the appeal vector needs at least 2 perceptual axes");
  if (in.dims.empty()) throw InvalidInput("no product dimensions");
  const int n = in.matrix.n;
  if (static_cast<int>(in.appeal.size()) != n || static_cast<int>(in.dims.size()) != n)
    throw InvalidInput("appeal scores and dimensions must cover all " + std::to_string(n) + " products");

  PipelineReport report;
  auto& j = report.json;
  j["seed"] = opt.seed;
  j["inputs"] = {{"products", n}, {"observed_pairs", in.matrix.entries.size()}};

  // Perceptual space.
  MdsOptions mds_opt;
  mds_opt.k = opt.k;
  mds_opt.restarts = opt.mds_restarts;
  mds_opt.seed = opt.seed;
  const auto config = fit_mds(in.matrix, mds_opt);
  nlohmann::json by_k = nlohmann::json::object();
  for (int k = 1; k <= 3 && k < n; ++k) {
    if (k == opt.k) {
      by_k[std::to_string(k)] = config.stress;
      continue;
    }
    auto o = mds_opt;
    o.k = k;
    by_k[std::to_string(k)] = fit_mds(in.matrix, o).stress;
  }
  j["mds"] = {{"k", opt.k},
              {"stress", config.stress},
              {"restarts", config.restarts_used},
              {"converged", config.converged},
              {"iterations", config.iterations},
              {"stress_by_k", by_k},
              {"published_stress", kPublishedStress},
              {"configuration", configuration_json(config)}};

  // Vector model on the two leading axes.
  PerceptualConfiguration plane = config;
  plane.points = config.points.leftCols(2);
  const auto vfit = fit_vector_model(plane, in.appeal, opt.significance_levels);
  std::vector<double> vector_levels;
  for (double v = 0.0; v <= 10.0; v += 2.0) vector_levels.push_back(v);
  auto pj = vector_fit_json(vfit);
  std::optional<AppealVectorPlot> vplot;
  if (vfit.a != 0.0 || vfit.b != 0.0) {
    vplot = appeal_vector(vfit, vector_levels);
    pj["direction"] = {vplot->direction[0], vplot->direction[1]};
  }
  const double f_at_published_r2 = f_statistic(kPublishedR2, n, 2);
  pj["published"] = {{"r_squared", kPublishedR2}, {"f_statistic", kPublishedF}};
  pj["f_at_published_r_squared"] = f_at_published_r2;
  pj["f_note"] = "F recomputed from R2 = " + format_number(kPublishedR2) + " with dof (2, " + std::to_string(n - 3) +
                 ") is " + format_fixed(f_at_published_r2, 2) + ", against a published F of " +
                 format_number(kPublishedF) + "; the gap matches rounding of R2 in the published table";
  j["prefmap"] = pj;

  // Appeal model.
  const auto obs = make_observations(in.appeal, in.rules, in.dims);
  FitOptions fopt;
  fopt.starts = opt.fit_starts;
  fopt.seed = opt.seed;
  fopt.k_nonneg = opt.k_nonneg;
  fopt.gradient_form = opt.gradient_form;
  const auto fit = fit_appeal_model(obs, fopt);
  auto aj = fit_json(fit, opt.gradient_form);
  aj["sign_pattern"] = sign_pattern(fit.model, obs, opt.gradient_form);
  if (in.reference) {
    AppealModel refit = *in.reference;
    refit.k = optimal_k(refit.a, obs, opt.gradient_form, opt.k_nonneg);
    const double published_obj = objective(*in.reference, obs, opt.gradient_form);
    const double refit_obj = objective(refit, obs, opt.gradient_form);
    aj["reference"] = {{"a", in.reference->a},
                       {"k", in.reference->k},
                       {"objective", published_obj},
                       {"k_refit", refit.k},
                       {"objective_k_refit", refit_obj},
                       {"fit_dominates", fit.objective <= refit_obj}};
  }
  j["appeal"] = aj;

  // Response surface over (d2, d3).
  std::vector<double> d1s;
  for (const auto& [id, d] : in.dims) d1s.push_back(d.d1);
  const double d1 = opt.fixed_d1.value_or(median(d1s));
  const Interval d2 = opt.d2_range.value_or(span(in.dims, 1));
  const Interval d3 = opt.d3_range.value_or(span(in.dims, 2));
  const auto surface = response_surface(fit.model, d1);
  const auto grid = surface_grid(surface, d2, d3, opt.resolution, opt.resolution);
  const auto levels = opt.iso_levels.empty() ? default_levels(grid.min(), grid.max()) : opt.iso_levels;
  const auto iso = iso_appeal_lines(surface, levels, d2, d3);
  j["surface"] = {{"coefficients", surface_json(surface)},
                  {"d2_range", {d2.lo, d2.hi}},
                  {"d3_range", {d3.lo, d3.hi}},
                  {"resolution", opt.resolution},
                  {"min", grid.min()},
                  {"max", grid.max()},
                  {"iso", iso_json(iso)},
                  {"iso_slope", slope_summary(iso)}};
  if (in.reference) {
    const auto ref_surface = response_surface(*in.reference, d1);
    const auto ref_iso = iso_appeal_lines(ref_surface, {}, d2, d3);
    j["surface"]["reference"] = {{"coefficients", surface_json(ref_surface)}, {"iso_slope", slope_summary(ref_iso)}};
  }

  std::vector<DesignParams> points;
  for (const auto& [id, d] : in.dims) points.push_back(d);
  report.artifacts["configuration.csv"] = configuration_csv(config);
  report.artifacts["perceptual_map.svg"] = perceptual_map_svg(plane, in.appeal);
  if (vplot) report.artifacts["appeal_vector.svg"] = appeal_vector_svg(plane, vfit, *vplot);
  report.artifacts["colormap.svg"] = colormap_svg(grid, d1, points);
  report.artifacts["iso_lines.svg"] = iso_lines_svg(iso, d2, d3, points);
  report.artifacts["model.json"] = model_json(fit.model).dump(2) + "\n";
  report.artifacts["surface.csv"] = grid_csv(grid);
  report.artifacts["iso_lines.csv"] = iso_csv(iso);
  nlohmann::json names = nlohmann::json::array();
  for (const auto& [name, content] : report.artifacts) names.push_back(name);
  j["artifacts"] = names;
  return report;
}

std::string report_text(const PipelineReport& report) { return report.json.dump(2) + "\n"; }

}  // namespace formsense
