// formsense: command-line runner for the assessment analysis pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "formsense/appeal.hpp"
#include "formsense/error.hpp"
#include "formsense/geometry.hpp"
#include "formsense/io.hpp"
#include "formsense/mds.hpp"
#include "formsense/pipeline.hpp"
#include "formsense/plots.hpp"
#include "formsense/prefmap.hpp"
#include "formsense/service.hpp"
#include "formsense/session.hpp"
#include "formsense/surface.hpp"

namespace fs = std::filesystem;
using namespace formsense;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::string format_or(const std::string& chosen, const std::string& fallback) {
  return chosen.empty() ? fallback : chosen;
}

fs::path input_or_fixture(const std::string& given, const char* name) {
  return given.empty() ? fixture_dir() / name : fs::path(given);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
}

Interval parse_interval(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ParseError("range '" + text + "' must be lo,hi");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ParseError("range '" + text + "' must be lo,hi");
  }
}

DesignParams parse_dims(const std::string& text) {
  std::stringstream in(text);
  DesignParams d;
  std::string part;
  for (std::size_t j = 0; j < 3; ++j) {
    if (!std::getline(in, part, ',')) throw ParseError("dims must be d1,d2,d3");
    try {
      d[j] = std::stod(part);
    } catch (const std::exception&) {
      throw ParseError("dims must be d1,d2,d3");
    }
  }
  if (std::getline(in, part, ',')) throw ParseError("dims must be d1,d2,d3");
  return d;
}

std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out = "key,value\n";
  for (const auto& [k, v] : rows) out += k + "," + v + "\n";
  return out;
}

bool is_validation_error(const Error& e) {
  static const std::vector<std::string> kKinds{"ParseError",  "RangeError",  "AsymmetryError",
                                               "NonZeroDiagonal", "InvalidInput", "CoverageError",
                                               "InsufficientVariation", "StageOrderError"};
  return std::find(kKinds.begin(), kKinds.end(), e.kind()) != kKinds.end();
}

void report_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
  std::string dissim, appeal, rules, session;
};

int cmd_validate(const ValidateArgs& args, const std::string& format) {
  const bool any = !args.dissim.empty() || !args.appeal.empty() || !args.rules.empty() || !args.session.empty();
  std::vector<std::pair<std::string, fs::path>> files;
  if (!any || !args.dissim.empty()) files.emplace_back("dissim", input_or_fixture(args.dissim, "dissim.csv"));
  if (!any || !args.appeal.empty()) files.emplace_back("appeal", input_or_fixture(args.appeal, "appeal.csv"));
  if (!any || !args.rules.empty()) files.emplace_back("rules", input_or_fixture(args.rules, "rules.csv"));
  if (!args.session.empty()) files.emplace_back("session", args.session);

  bool valid = true;
  json out = json::object();
  std::string csv = "file,kind,i,j,message\n";
  for (const auto& [kind, path] : files) {
    json violations = json::array();
    auto add = [&](const std::string& k, int i, int j, const std::string& message) {
      violations.push_back({{"kind", k}, {"i", i}, {"j", j}, {"message", message}});
      csv += kind + "," + k + "," + std::to_string(i) + "," + std::to_string(j) + ",\"" + message + "\"\n";
      std::cerr << path.string() << ": " << message << "\n";
    };
    try {
      const auto text = read_file(path);
      if (kind == "dissim") {
        static const char* kNames[]{"ValueOutOfRange", "Coverage", "SelfPair", "UnknownProduct"};
        for (const auto& v : validate_dissimilarity(load_matrix(text)).violations)
          add(kNames[static_cast<int>(v.kind)], v.i, v.j, v.message);
      } else if (kind == "appeal") {
        load_appeal(text);
      } else if (kind == "rules") {
        load_rules(text);
        load_dims(text);
      } else {
        const auto s = Session::from_json(json::parse(text));
        for (const auto& v : validate_dissimilarity(s.dissimilarities()).violations)
          if (s.stage_status(1) == StageStatus::Complete || v.kind != Violation::Kind::Coverage)
            add("Stage1", v.i, v.j, v.message);
      }
    } catch (const Error& e) {
      add(e.kind(), 0, 0, e.what());
    } catch (const json::exception& e) {
      add("ParseError", 0, 0, e.what());
    }
    valid = valid && violations.empty();
    out[kind] = {{"path", path.string()}, {"valid", violations.empty()}, {"violations", violations}};
  }
  out["valid"] = valid;
  std::cout << (format == "csv" ? csv : out.dump(2) + "\n");
  return valid ? 0 : kExitValidation;
}

// ---------------------------------------------------------------- mds

struct MdsArgs {
  std::string dissim, out;
  MdsOptions options;
};

int cmd_mds(const MdsArgs& args, const std::string& format) {
  const auto matrix = load_matrix(read_file(input_or_fixture(args.dissim, "dissim.csv")));
  const auto config = fit_mds(matrix, args.options);
  if (!config.converged) report_error("ConvergenceWarning", "no restart met the tolerance");
  emit(format == "json" ? configuration_json(config).dump(2) + "\n" : configuration_csv(config), args.out);
  return 0;
}

// ---------------------------------------------------------------- prefmap

struct PrefmapArgs {
  std::string config, appeal, svg;
  std::vector<double> p_levels{0.01, 0.05};
};

int cmd_prefmap(const PrefmapArgs& args, const std::string& format) {
  const auto config = load_configuration_csv(read_file(args.config));
  const auto appeal = load_appeal(read_file(input_or_fixture(args.appeal, "appeal.csv")));
  const auto fit = fit_vector_model(config, appeal, args.p_levels);
  auto j = vector_fit_json(fit);
  if (fit.a != 0.0 || fit.b != 0.0) {
    const auto plot = appeal_vector(fit, {0, 2, 4, 6, 8, 10});
    j["direction"] = {plot.direction[0], plot.direction[1]};
    if (!args.svg.empty()) write_file(args.svg, appeal_vector_svg(config, fit, plot));
  }
  if (format == "csv") {
    std::vector<std::pair<std::string, std::string>> rows{{"a", format_number(fit.a)},
                                                          {"b", format_number(fit.b)},
                                                          {"c", format_number(fit.c)},
                                                          {"r_squared", format_number(fit.r_squared)},
                                                          {"f_statistic", format_number(fit.f_statistic)},
                                                          {"p_value", format_number(fit.p_value)}};
    for (const auto& [level, sig] : fit.significant_at)
      rows.emplace_back("significant_at_" + format_number(level), sig ? "true" : "false");
    std::cout << kv_csv(rows);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string appeal, rules, out;
  FitOptions options;
  bool eq4_as_printed = false;
};

int cmd_fit(FitArgs args, const std::string& format) {
  const auto appeal = load_appeal(read_file(input_or_fixture(args.appeal, "appeal.csv")));
  const auto rules_text = read_file(input_or_fixture(args.rules, "rules.csv"));
  const auto obs = make_observations(appeal, load_rules(rules_text), load_dims(rules_text));
  if (args.eq4_as_printed) args.options.gradient_form = GradientForm::AsPrinted;
  const auto fit = fit_appeal_model(obs, args.options);
  if (!args.out.empty()) write_file(args.out, model_json(fit.model).dump(2) + "\n");
  if (format == "csv") {
    std::vector<std::pair<std::string, std::string>> rows;
    for (std::size_t c = 0; c < kCoefficients; ++c) rows.emplace_back("a" + std::to_string(c + 1), format_number(fit.model.a[c]));
    for (std::size_t c = 0; c < 3; ++c) rows.emplace_back("k" + std::to_string(c + 1), format_number(fit.model.k[c]));
    rows.emplace_back("objective", format_number(fit.objective));
    std::cout << kv_csv(rows);
  } else {
    std::cout << fit_json(fit, args.options.gradient_form).dump(2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- surface

struct SurfaceArgs {
  std::string model, d2_range = "3,7", d3_range = "6,9.5", svg, iso_svg, iso_csv_out;
  double d1 = 8.0;
  int resolution = 50;
  std::vector<double> levels;
};

int cmd_surface(const SurfaceArgs& args, const std::string& format) {
  const auto model = load_model(json::parse(read_file(input_or_fixture(args.model, "reference_model.json"))));
  const auto surface = response_surface(model, args.d1);
  const auto d2 = parse_interval(args.d2_range), d3 = parse_interval(args.d3_range);
  const auto grid = surface_grid(surface, d2, d3, args.resolution, args.resolution);
  const auto iso = iso_appeal_lines(surface, args.levels, d2, d3);
  if (!args.svg.empty()) write_file(args.svg, colormap_svg(grid, args.d1));
  if (!args.iso_svg.empty()) write_file(args.iso_svg, iso_lines_svg(iso, d2, d3));
  if (!args.iso_csv_out.empty()) write_file(args.iso_csv_out, iso_csv(iso));
  if (format == "csv") {
    std::cout << grid_csv(grid);
  } else {
    std::cout << json{{"surface", surface_json(surface)},
                      {"min", grid.min()},
                      {"max", grid.max()},
                      {"iso", iso_json(iso)}}
                     .dump(2)
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string tmpl, dims, rule, svg, stl;
  int product = 0;
  std::optional<double> delta;
  int segments = 64;
  int samples = 24;
};

int cmd_render(const RenderArgs& args) {
  const fs::path tpath = input_or_fixture(args.tmpl, "template.json");
  const auto tmpl = fs::exists(tpath) || !args.tmpl.empty() ? load_template(read_file(tpath)) : canonical_template();
  DesignParams dims;
  if (args.product > 0) {
    const auto table = load_dims(read_file(fixture_dir() / "rules.csv"));
    const auto it = table.find(args.product);
    if (it == table.end()) throw NotFound("unknown product " + std::to_string(args.product));
    dims = it->second;
  } else if (!args.dims.empty()) {
    dims = parse_dims(args.dims);
  } else {
    throw InvalidInput("give --dims d1,d2,d3 or --product id");
  }
  if (!args.rule.empty()) {
    const auto rule = parse_rule(args.rule);
    if (!rule) throw InvalidInput("rule must be R1, R2 or R3");
    dims = apply_rule(dims, *rule, args.delta.value_or(default_rule_delta(dims, *rule)));
  }
  const auto shape = generate_profile(tmpl, dims, args.samples);
  if (!args.stl.empty()) write_file(args.stl, revolve(shape, args.segments).to_stl());
  if (!args.svg.empty() || args.stl.empty()) emit(profile_svg(shape), args.svg);
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string dir, session, out = "report";
  PipelineOptions options;
  bool eq4_as_printed = false;
};

int cmd_report(ReportArgs args) {
  PipelineInputs inputs;
  if (!args.session.empty()) {
    const auto session = Session::from_json(json::parse(read_file(args.session)));
    const auto ref = fixture_dir() / "reference_model.json";
    std::optional<AppealModel> reference;
    if (fs::exists(ref)) reference = load_model(json::parse(read_file(ref)));
    inputs = inputs_from_session(session, reference);
  } else {
    inputs = load_pipeline_inputs(args.dir.empty() ? fixture_dir() : fs::path(args.dir));
  }
  if (args.eq4_as_printed) args.options.gradient_form = GradientForm::AsPrinted;
  const auto report = run_pipeline(inputs, args.options);
  const fs::path out(args.out);
  fs::create_directories(out);
  write_file(out / "report.json", report_text(report));
  json written = json::array({(out / "report.json").string()});
  for (const auto& [name, content] : report.artifacts) {
    write_file(out / name, content);
    written.push_back((out / name).string());
  }
  std::cout << json{{"written", written}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formsense: perceptual maps, preference mapping and appeal models for parametric forms"};
  app.require_subcommand(1);
  std::string format;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  ValidateArgs validate;
  auto* c_validate = app.add_subcommand("validate", "Check input files (bundled fixtures when none given)");
  c_validate->add_option("--dissim", validate.dissim, "Dissimilarity matrix CSV");
  c_validate->add_option("--appeal", validate.appeal, "Appeal scores CSV");
  c_validate->add_option("--rules", validate.rules, "Rule assessments CSV");
  c_validate->add_option("--session", validate.session, "Session JSON");

  MdsArgs mds;
  auto* c_mds = app.add_subcommand("mds", "Fit a perceptual configuration");
  c_mds->add_option("--dissim", mds.dissim, "Dissimilarity matrix CSV");
  c_mds->add_option("--k", mds.options.k, "Dimensions")->capture_default_str();
  c_mds->add_option("--restarts", mds.options.restarts, "Random restarts")->capture_default_str();
  c_mds->add_option("--max-iterations", mds.options.max_iterations, "Iteration cap per restart")->capture_default_str();
  c_mds->add_option("--tolerance", mds.options.tolerance, "Stop when stress improves by less than this")->capture_default_str();
  c_mds->add_option("--seed", mds.options.seed, "Random seed")->capture_default_str();
  c_mds->add_option("--out", mds.out, "Output file (stdout by default)");

  PrefmapArgs prefmap;
  auto* c_prefmap = app.add_subcommand("prefmap", "Regress appeal on a perceptual configuration");
  c_prefmap->add_option("--config", prefmap.config, "Configuration CSV from `mds`")->required();
  c_prefmap->add_option("--appeal", prefmap.appeal, "Appeal scores CSV");
  c_prefmap->add_option("--p-level", prefmap.p_levels, "Significance levels")->capture_default_str();
  c_prefmap->add_option("--svg", prefmap.svg, "Write the appeal-vector plot here");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit the quadratic appeal model");
  c_fit->add_option("--appeal", fit.appeal, "Appeal scores CSV");
  c_fit->add_option("--rules", fit.rules, "Rule assessments CSV");
  c_fit->add_option("--starts", fit.options.starts, "Random starts")->capture_default_str();
  c_fit->add_option("--seed", fit.options.seed, "Random seed")->capture_default_str();
  c_fit->add_option("--ridge", fit.options.ridge, "Ridge weight on non-intercept coefficients")->capture_default_str();
  c_fit->add_flag("--k-nonneg", fit.options.k_nonneg, "Constrain the rule factors to be nonnegative");
  c_fit->add_flag("--eq4-as-printed", fit.eq4_as_printed, "Use the literal published derivative formulas");
  c_fit->add_flag("!--no-polish", fit.options.polish, "Skip the Levenberg-Marquardt polish");
  c_fit->add_option("--out", fit.out, "Write the model JSON here");

  SurfaceArgs surface;
  auto* c_surface = app.add_subcommand("surface", "Response surface, colormap and iso-appeal lines");
  c_surface->add_option("--model", surface.model, "Model JSON (bundled reference by default)");
  c_surface->add_option("--d1", surface.d1, "Fixed d1")->capture_default_str();
  c_surface->add_option("--d2-range", surface.d2_range, "lo,hi")->capture_default_str();
  c_surface->add_option("--d3-range", surface.d3_range, "lo,hi")->capture_default_str();
  c_surface->add_option("--resolution", surface.resolution, "Raster samples per axis")->capture_default_str();
  c_surface->add_option("--levels", surface.levels, "Iso-appeal levels");
  c_surface->add_option("--svg", surface.svg, "Write the colormap SVG here");
  c_surface->add_option("--iso-svg", surface.iso_svg, "Write the iso-line SVG here");
  c_surface->add_option("--iso-csv", surface.iso_csv_out, "Write iso-line polylines as CSV here");

  RenderArgs render;
  double delta = 0.0;
  auto* c_render = app.add_subcommand("render", "Render a glass profile (SVG) or mesh (STL)");
  c_render->add_option("--template", render.tmpl, "Template JSON");
  c_render->add_option("--dims", render.dims, "d1,d2,d3");
  c_render->add_option("--product", render.product, "Bundled product id");
  c_render->add_option("--rule", render.rule, "R1, R2 or R3");
  auto* delta_opt = c_render->add_option("--delta", delta, "Rule step in cm (10% of the dimension by default)");
  c_render->add_option("--segments", render.segments, "Angular segments for STL")->capture_default_str();
  c_render->add_option("--samples", render.samples, "Samples per spline segment")->capture_default_str();
  c_render->add_option("--svg", render.svg, "SVG output file");
  c_render->add_option("--stl", render.stl, "ASCII STL output file");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Run the whole pipeline and write the report and figures");
  c_report->add_option("--dir", report.dir, "Input directory (bundled fixtures by default)");
  c_report->add_option("--session", report.session, "Session JSON instead of --dir");
  c_report->add_option("--out", report.out, "Output directory")->capture_default_str();
  c_report->add_option("--seed", report.options.seed, "Random seed")->capture_default_str();
  c_report->add_option("--restarts", report.options.mds_restarts, "MDS restarts")->capture_default_str();
  c_report->add_option("--starts", report.options.fit_starts, "Appeal-fit starts")->capture_default_str();
  c_report->add_flag("--k-nonneg", report.options.k_nonneg, "Constrain the rule factors to be nonnegative");
  c_report->add_flag("--eq4-as-printed", report.eq4_as_printed, "Use the literal published derivative formulas");

  std::string host = "127.0.0.1";
  int port = 8080;
  ServiceConfig service;
  std::string static_dir;
  auto* c_serve = app.add_subcommand("serve", "Serve the HTTP API");
  c_serve->add_option("--host", host, "Listen address")->capture_default_str();
  c_serve->add_option("--port", port, "Listen port")->capture_default_str();
  c_serve->add_option("--data", service.data_dir, "Session directory")->capture_default_str();
  c_serve->add_option("--static", static_dir, "Static files to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*c_validate) return cmd_validate(validate, format_or(format, "json"));
    if (*c_mds) return cmd_mds(mds, format_or(format, "csv"));
    if (*c_prefmap) return cmd_prefmap(prefmap, format_or(format, "json"));
    if (*c_fit) return cmd_fit(fit, format_or(format, "json"));
    if (*c_surface) return cmd_surface(surface, format_or(format, "json"));
    if (*c_render) {
      if (delta_opt->count() > 0) render.delta = delta;
      return cmd_render(render);
    }
    if (*c_report) return cmd_report(report);
    if (*c_serve) {
      service.fixture_dir = fixture_dir();
      if (!static_dir.empty()) service.static_dir = static_dir;
      std::cerr << "listening on " << host << ":" << port << "\n";
      return run_service(host, port, service);
    }
  } catch (const Error& e) {
    report_error(e.kind(), e.what());
    return is_validation_error(e) ? kExitValidation : kExitRuntime;
  } catch (const json::exception& e) {
    report_error("ParseError", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    report_error("RuntimeError", e.what());
    return kExitRuntime;
  }
  return 0;
}
