#include "formsense/appeal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <Eigen/Dense>

#include "formsense/error.hpp"
#include "formsense/random.hpp"

namespace formsense {

FeatureRow appeal_features(const DesignParams& d) {
  return {d.d1, d.d2, d.d3, d.d1 * d.d1, d.d2 * d.d2, d.d3 * d.d3, d.d1 * d.d2, d.d1 * d.d3, d.d2 * d.d3, 1.0};
}

std::array<FeatureRow, 3> gradient_features(const DesignParams& d, GradientForm form) {
  const double d1 = d.d1, d2 = d.d2, d3 = d.d3;
  if (form == GradientForm::Exact)
    return {{{1, 0, 0, 2 * d1, 0, 0, d2, d3, 0, 0},
             {0, 1, 0, 0, 2 * d2, 0, d1, 0, d3, 0},
             {0, 0, 1, 0, 0, 2 * d3, 0, d1, d2, 0}}};
  return {{{1, 0, 0, 2 * d1, 0, 0, d1 * d2, d1 * d3, 0, 0},
           {0, 1, 0, 0, 2 * d2, 0, d1 * d2, 0, d2 * d3, 0},
           {0, 0, 1, 0, 0, 2 * d3, 0, d1 * d3, d2 * d3, 0}}};
}

namespace {

double dot(const FeatureRow& row, const std::array<double, kCoefficients>& a) {
  double s = 0.0;
  for (std::size_t c = 0; c < kCoefficients; ++c) s += row[c] * a[c];
  return s;
}

}  // namespace

double predict_appeal(const AppealModel& model, const DesignParams& dims) {
  return dot(appeal_features(dims), model.a);
}

std::array<double, 3> appeal_gradient(const AppealModel& model, const DesignParams& dims, GradientForm form) {
  const auto rows = gradient_features(dims, form);
  return {dot(rows[0], model.a), dot(rows[1], model.a), dot(rows[2], model.a)};
}

ObjectiveTerms objective_terms(const AppealModel& model, const std::vector<Observation>& observations,
                               GradientForm form) {
  ObjectiveTerms t;
  for (const auto& o : observations) {
    const double r = o.appeal - predict_appeal(model, o.dims);
    t.appeal += r * r;
    const auto g = appeal_gradient(model, o.dims, form);
    for (int j = 0; j < 3; ++j) {
      const double rd = o.deltas[j] - model.k[j] * g[j];
      t.derivative += rd * rd;
    }
  }
  return t;
}

double objective(const AppealModel& model, const std::vector<Observation>& observations, GradientForm form) {
  return objective_terms(model, observations, form).total();
}

std::array<double, 3> optimal_k(const std::array<double, kCoefficients>& a, const std::vector<Observation>& observations,
                                GradientForm form, bool k_nonneg) {
  std::array<double, 3> num{}, den{};
  for (const auto& o : observations) {
    const auto rows = gradient_features(o.dims, form);
    for (int j = 0; j < 3; ++j) {
      const double h = dot(rows[j], a);
      num[j] += o.deltas[j] * h;
      den[j] += h * h;
    }
  }
  std::array<double, 3> k{};
  for (int j = 0; j < 3; ++j) {
    k[j] = den[j] > 1e-300 ? num[j] / den[j] : 0.0;
    if (k_nonneg) k[j] = std::max(0.0, k[j]);
  }
  return k;
}

namespace {

// Precomputed design rows for one fit.
struct Design {
  std::vector<FeatureRow> phi;                 // per observation
  std::vector<std::array<FeatureRow, 3>> grad; // per observation
  std::vector<double> appeal;
  std::vector<std::array<int, 3>> deltas;
  std::size_t n = 0;
};

Design make_design(const std::vector<Observation>& observations, GradientForm form) {
  Design d;
  d.n = observations.size();
  for (const auto& o : observations) {
    d.phi.push_back(appeal_features(o.dims));
    d.grad.push_back(gradient_features(o.dims, form));
    d.appeal.push_back(o.appeal);
    d.deltas.push_back(o.deltas);
  }
  return d;
}

using Coefs = std::array<double, kCoefficients>;

Coefs solve_a(const Design& d, const std::array<double, 3>& k, double ridge) {
  const std::size_t penalised = kCoefficients - 1;
  const auto rows = static_cast<Eigen::Index>(4 * d.n + (ridge > 0.0 ? penalised : 0));
  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Zero(rows, kCoefficients);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < d.n; ++i, ++r) {
    for (std::size_t c = 0; c < kCoefficients; ++c) a_mat(r, c) = d.phi[i][c];
    rhs(r) = d.appeal[i];
  }
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < d.n; ++i, ++r) {
      for (std::size_t c = 0; c < kCoefficients; ++c) a_mat(r, c) = k[j] * d.grad[i][j][c];
      rhs(r) = d.deltas[i][j];
    }
  if (ridge > 0.0)
    for (std::size_t c = 0; c < penalised; ++c, ++r) a_mat(r, c) = std::sqrt(ridge);
  const Eigen::VectorXd sol = a_mat.colPivHouseholderQr().solve(rhs);
  Coefs a{};
  for (std::size_t c = 0; c < kCoefficients; ++c) a[c] = sol(c);
  return a;
}

std::array<double, 3> solve_k(const Design& d, const Coefs& a, bool k_nonneg) {
  std::array<double, 3> num{}, den{};
  for (std::size_t i = 0; i < d.n; ++i)
    for (int j = 0; j < 3; ++j) {
      const double h = dot(d.grad[i][j], a);
      num[j] += d.deltas[i][j] * h;
      den[j] += h * h;
    }
  std::array<double, 3> k{};
  for (int j = 0; j < 3; ++j) {
    k[j] = den[j] > 1e-300 ? num[j] / den[j] : 0.0;
    if (k_nonneg) k[j] = std::max(0.0, k[j]);
  }
  return k;
}

// Residual vector: n appeal residuals, then 3n derivative residuals (rule-major).
Eigen::VectorXd residuals(const Design& d, const Coefs& a, const std::array<double, 3>& k) {
  Eigen::VectorXd res(static_cast<Eigen::Index>(4 * d.n));
  for (std::size_t i = 0; i < d.n; ++i) res(static_cast<Eigen::Index>(i)) = d.appeal[i] - dot(d.phi[i], a);
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < d.n; ++i)
      res(static_cast<Eigen::Index>((1 + j) * d.n + i)) = d.deltas[i][j] - k[j] * dot(d.grad[i][j], a);
  return res;
}

double regularised(const Design& d, const Coefs& a, const std::array<double, 3>& k, double ridge) {
  double pen = 0.0;
  for (std::size_t c = 0; c + 1 < kCoefficients; ++c) pen += a[c] * a[c];
  return residuals(d, a, k).squaredNorm() + ridge * pen;
}

// Jacobian of the residual vector with respect to (a1..a10, k1..k3).
Eigen::MatrixXd jacobian(const Design& d, const Coefs& a, const std::array<double, 3>& k) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(4 * d.n), kCoefficients + 3);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t c = 0; c < kCoefficients; ++c) jac(static_cast<Eigen::Index>(i), c) = -d.phi[i][c];
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < d.n; ++i) {
      const auto row = static_cast<Eigen::Index>((1 + j) * d.n + i);
      for (std::size_t c = 0; c < kCoefficients; ++c) jac(row, c) = -k[j] * d.grad[i][j][c];
      jac(row, static_cast<Eigen::Index>(kCoefficients) + j) = -dot(d.grad[i][j], a);
    }
  return jac;
}

struct StartResult {
  AppealModel model;
  double objective = std::numeric_limits<double>::infinity();
  int alternations = 0;
  int polish_iterations = 0;
  bool converged = false;
};

int polish(const Design& d, Coefs& a, std::array<double, 3>& k, const FitOptions& options) {
  double f = residuals(d, a, k).squaredNorm();
  double mu = -1.0;
  int it = 0;
  for (; it < options.polish_iterations; ++it) {
    const Eigen::VectorXd r = residuals(d, a, k);
    const Eigen::MatrixXd jac = jacobian(d, a, k);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + f)) break;
    if (mu < 0.0) mu = 1e-3 * jtj.diagonal().maxCoeff();
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::MatrixXd lhs = jtj;
      lhs.diagonal().array() += mu;
      const Eigen::VectorXd step = lhs.ldlt().solve(-g);
      Coefs a_new = a;
      std::array<double, 3> k_new = k;
      for (std::size_t c = 0; c < kCoefficients; ++c) a_new[c] += step(static_cast<Eigen::Index>(c));
      for (int j = 0; j < 3; ++j) {
        k_new[j] += step(static_cast<Eigen::Index>(kCoefficients) + j);
        if (options.k_nonneg) k_new[j] = std::max(0.0, k_new[j]);
      }
      const double f_new = residuals(d, a_new, k_new).squaredNorm();
      if (f_new < f) {
        a = a_new;
        k = k_new;
        const double gain = f - f_new;
        f = f_new;
        mu = std::max(mu / 3.0, 1e-300);
        improved = true;
        if (gain <= 1e-16 * (1.0 + f)) return it + 1;
      } else {
        mu *= 2.0;
      }
    }
    if (!improved) break;
  }
  return it;
}

StartResult run_start(const Design& d, const FitOptions& options, int start) {
  Rng rng(options.seed, static_cast<std::uint64_t>(start));
  std::array<double, 3> k{};
  for (auto& kj : k)
    kj = options.k_nonneg ? rng.uniform(0.0, options.k_init_range) : rng.uniform(-options.k_init_range, options.k_init_range);

  StartResult out;
  Coefs a = solve_a(d, k, options.ridge);
  double previous = regularised(d, a, k, options.ridge);
  for (int it = 1; it <= options.max_alternations; ++it) {
    k = solve_k(d, a, options.k_nonneg);
    a = solve_a(d, k, options.ridge);
    const double current = regularised(d, a, k, options.ridge);
    out.alternations = it;
    if (previous - current <= options.tolerance * (1.0 + current)) {
      out.converged = true;
      break;
    }
    previous = current;
  }
  if (options.polish) out.polish_iterations = polish(d, a, k, options);
  out.model.a = a;
  out.model.k = k;
  out.objective = residuals(d, a, k).squaredNorm();
  return out;
}

void check_fit_input(const std::vector<Observation>& observations, const FitOptions& options) {
  if (observations.empty()) throw InvalidInput("no observations to fit");
  if (options.starts < 1) throw InvalidInput("starts must be at least 1");
  std::set<std::tuple<double, double, double>> distinct;
  for (const auto& o : observations) {
    if (!o.dims.positive()) throw RangeError("observation dimensions must be strictly positive");
    for (int c : o.deltas)
      if (c < -1 || c > 1) throw RangeError("rule codes must be -1, 0 or 1");
    distinct.emplace(o.dims.d1, o.dims.d2, o.dims.d3);
  }
  if (distinct.size() < 2) throw InsufficientVariation("fewer than 2 distinct design-parameter triples");
  if (options.ridge <= 0.0) {
    std::string constant;
    for (std::size_t j = 0; j < 3; ++j) {
      const double first = observations.front().dims[j];
      if (std::all_of(observations.begin(), observations.end(), [&](const auto& o) { return o.dims[j] == first; }))
        constant += (constant.empty() ? "d" : ", d") + std::to_string(j + 1);
    }
    if (!constant.empty())
      throw InsufficientVariation("constant design column(s) " + constant + " without regularization");
  }
}

IdentifiabilityReport identifiability(const std::vector<Observation>& observations, const Design& d,
                                      const std::array<double, 3>& k) {
  IdentifiabilityReport rep;
  for (std::size_t j = 0; j < 3; ++j) {
    const double first = observations.front().dims[j];
    if (std::all_of(observations.begin(), observations.end(), [&](const auto& o) { return o.dims[j] == first; }))
      rep.constant_columns.push_back("d" + std::to_string(j + 1));
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(4 * d.n), kCoefficients);
  for (std::size_t i = 0; i < d.n; ++i)
    for (std::size_t c = 0; c < kCoefficients; ++c) stacked(static_cast<Eigen::Index>(i), c) = d.phi[i][c];
  for (int j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < d.n; ++i)
      for (std::size_t c = 0; c < kCoefficients; ++c)
        stacked(static_cast<Eigen::Index>((1 + j) * d.n + i), c) = k[j] * d.grad[i][j][c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  rep.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < s.size(); ++c) {
    if (s(c) > 1e-9 * smax) continue;
    const Eigen::VectorXd v = svd.matrixV().col(c);
    const double vmax = v.cwiseAbs().maxCoeff();
    std::vector<std::string> group;
    for (std::size_t t = 0; t < kCoefficients; ++t)
      if (std::abs(v(static_cast<Eigen::Index>(t))) > 1e-6 * vmax) group.push_back("a" + std::to_string(t + 1));
    rep.collinear_groups.push_back(std::move(group));
  }
  return rep;
}

AppealFit assemble(const std::vector<Observation>& observations, const Design& d, const FitOptions& options,
                   std::vector<StartResult>& results) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].objective < results[best].objective) best = s;
  const auto& win = results[best];
  AppealFit fit;
  fit.model = win.model;
  fit.terms = objective_terms(win.model, observations, options.gradient_form);
  fit.objective = fit.terms.total();
  fit.starts = static_cast<int>(results.size());
  fit.best_start = static_cast<int>(best);
  fit.alternations = win.alternations;
  fit.polish_iterations = win.polish_iterations;
  fit.converged = win.converged;
  for (const auto& o : observations) {
    fit.appeal_residuals.push_back(o.appeal - predict_appeal(win.model, o.dims));
    const auto g = appeal_gradient(win.model, o.dims, options.gradient_form);
    fit.derivative_residuals.push_back(
        {o.deltas[0] - win.model.k[0] * g[0], o.deltas[1] - win.model.k[1] * g[1], o.deltas[2] - win.model.k[2] * g[2]});
  }
  fit.identifiability = identifiability(observations, d, win.model.k);
  return fit;
}

}  // namespace

AppealFit fit_appeal_model(const std::vector<Observation>& observations, const FitOptions& options) {
  check_fit_input(observations, options);
  const auto d = make_design(observations, options.gradient_form);
  std::vector<StartResult> results(static_cast<std::size_t>(options.starts));
#pragma omp parallel for schedule(dynamic, 1)
  for (int s = 0; s < options.starts; ++s) results[static_cast<std::size_t>(s)] = run_start(d, options, s);
  return assemble(observations, d, options, results);
}

AppealFit fit_appeal_model_reference(const std::vector<Observation>& observations, const FitOptions& options) {
  check_fit_input(observations, options);
  const auto d = make_design(observations, options.gradient_form);
  std::vector<StartResult> results;
  for (int s = 0; s < options.starts; ++s) results.push_back(run_start(d, options, s));
  return assemble(observations, d, options, results);
}

std::vector<Observation> make_observations(const AppealScores& appeal, const RuleAssessmentSet& rules,
                                           const DimsTable& dims) {
  std::vector<Observation> out;
  for (const auto& [id, score] : appeal) {
    const auto r = rules.find(id);
    const auto d = dims.find(id);
    if (r == rules.end()) throw InvalidInput("no rule codes for product " + std::to_string(id));
    if (d == dims.end()) throw InvalidInput("no dimensions for product " + std::to_string(id));
    out.push_back({d->second, score, r->second});
  }
  for (const auto& [id, codes] : rules)
    if (!appeal.count(id)) throw InvalidInput("no appeal score for product " + std::to_string(id));
  return out;
}

AppealModel load_model(const nlohmann::json& j) {
  try {
    AppealModel m;
    const auto& a = j.at("a");
    const auto& k = j.at("k");
    if (a.size() != kCoefficients || k.size() != 3) throw ParseError("model needs a[10] and k[3]");
    for (std::size_t c = 0; c < kCoefficients; ++c) m.a[c] = a[c].get<double>();
    for (std::size_t c = 0; c < 3; ++c) m.k[c] = k[c].get<double>();
    for (double v : m.a)
      if (!std::isfinite(v)) throw RangeError("model coefficients must be finite");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model json: ") + e.what());
  }
}

nlohmann::json model_json(const AppealModel& model) { return {{"a", model.a}, {"k", model.k}}; }

nlohmann::json fit_json(const AppealFit& fit, GradientForm form) {
  nlohmann::json derivative = nlohmann::json::array();
  for (const auto& r : fit.derivative_residuals) derivative.push_back(r);
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : fit.identifiability.collinear_groups) groups.push_back(g);
  const double cond = fit.identifiability.condition_number;
  return {{"a", fit.model.a},
          {"k", fit.model.k},
          {"gradient_form", form == GradientForm::Exact ? "exact" : "as_printed"},
          {"objective", fit.objective},
          {"appeal_term", fit.terms.appeal},
          {"derivative_term", fit.terms.derivative},
          {"appeal_residuals", fit.appeal_residuals},
          {"derivative_residuals", derivative},
          {"starts", fit.starts},
          {"best_start", fit.best_start},
          {"alternations", fit.alternations},
          {"polish_iterations", fit.polish_iterations},
          {"converged", fit.converged},
          {"identifiability",
           {{"constant_columns", fit.identifiability.constant_columns},
            {"collinear_groups", groups},
            {"condition_number", std::isinf(cond) ? nlohmann::json("inf") : nlohmann::json(cond)}}}};
}

}  // namespace formsense
