#include <doctest.h>

#include <cmath>

#include "formsense/appeal.hpp"
#include "formsense/error.hpp"
#include "formsense/io.hpp"
#include "formsense/random.hpp"

using namespace formsense;

namespace {

const std::array<double, 10> kPublishedA{3.6, 0.12, 13.6, -1.52, 0.02, -0.13, -0.01, -1.71, 0.01, 82.36};

AppealModel published() {
  return load_model(nlohmann::json::parse(read_file(fixture_dir() / "reference_model.json")));
}

std::vector<Observation> bundled_observations() {
  const auto dir = fixture_dir();
  const auto rules_text = read_file(dir / "rules.csv");
  return make_observations(load_appeal(read_file(dir / "appeal.csv")), load_rules(rules_text), load_dims(rules_text));
}

// The quadratic written out term by term.
double plug_in(const std::array<double, 10>& a, double d1, double d2, double d3) {
  return a[0] * d1 + a[1] * d2 + a[2] * d3 + a[3] * d1 * d1 + a[4] * d2 * d2 + a[5] * d3 * d3 + a[6] * d1 * d2 +
         a[7] * d1 * d3 + a[8] * d2 * d3 + a[9];
}

AppealModel random_model(Rng& rng) {
  AppealModel m;
  for (auto& v : m.a) v = rng.uniform(-1, 1);
  for (auto& v : m.k) v = rng.uniform(-2, 2);
  return m;
}

double total_with(const AppealModel& m, const std::vector<Observation>& obs) { return objective(m, obs); }

}  // namespace

TEST_CASE("published model evaluated at bundled glasses") {
  const auto m = published();
  CHECK(m.a == kPublishedA);
  CHECK(m.k == std::array<double, 3>{-0.01, 14.15, 0.01});
  CHECK(predict_appeal(m, {8, 7, 6}) == doctest::Approx(plug_in(kPublishedA, 8, 7, 6)).epsilon(1e-12));
  CHECK(predict_appeal(m, {8, 7, 6}) == doctest::Approx(10.40).epsilon(1e-3));
  CHECK(predict_appeal(m, {8, 7, 9.5}) == doctest::Approx(3.3125).epsilon(1e-9));
  const auto g = appeal_gradient(m, {8, 5, 8});
  CHECK(g[1] == doctest::Approx(0.32).epsilon(1e-9));
  CHECK(g[2] == doctest::Approx(-2.11).epsilon(1e-9));
}

TEST_CASE("analytic gradient agrees with central differences") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = random_model(rng);
    const DesignParams d{rng.uniform(4, 12), rng.uniform(2, 8), rng.uniform(5, 10)};
    const auto g = appeal_gradient(m, d);
    for (std::size_t j = 0; j < 3; ++j) {
      const double h = 1e-5;
      DesignParams up = d, down = d;
      up[j] += h;
      down[j] -= h;
      const double fd = (plug_in(m.a, up.d1, up.d2, up.d3) - plug_in(m.a, down.d1, down.d2, down.d3)) / (2 * h);
      CHECK(std::abs(g[j] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("as-printed derivative differs from the true one") {
  const auto m = published();
  const DesignParams d{8, 5, 8};
  const auto exact = appeal_gradient(m, d, GradientForm::Exact);
  const auto printed = appeal_gradient(m, d, GradientForm::AsPrinted);
  CHECK(exact[0] != doctest::Approx(printed[0]));
  // With only the pure quadratic and linear terms the two forms coincide.
  AppealModel diagonal;
  diagonal.a = {1, 2, 3, 0.5, -0.5, 0.25, 0, 0, 0, 7};
  const auto e2 = appeal_gradient(diagonal, d, GradientForm::Exact);
  const auto p2 = appeal_gradient(diagonal, d, GradientForm::AsPrinted);
  for (std::size_t j = 0; j < 3; ++j) CHECK(e2[j] == doctest::Approx(p2[j]));
}

TEST_CASE("objective on a hand-sized example") {
  AppealModel zero;
  zero.k = {3, -1, 2};
  const std::vector<Observation> one{{{8, 5, 8}, 1.0, {1, 0, 0}}};
  CHECK(objective(zero, one) == doctest::Approx(2.0));
  const auto t = objective_terms(zero, one);
  CHECK(t.appeal == doctest::Approx(1.0));
  CHECK(t.derivative == doctest::Approx(1.0));

  // Intercept-only model at the observed score: only the codes contribute, 1 + 0 + 1.
  AppealModel flat;
  flat.a[9] = 6.0;
  CHECK(objective(flat, {{{8, 5, 8}, 6.0, {1, 0, -1}}}) == doctest::Approx(2.0));

  // A perfect fit scores zero.
  AppealModel linear;
  linear.a = {0, 0.5, -0.25, 0, 0, 0, 0, 0, 0, 1};
  linear.k = {0, 2, 4};
  CHECK(objective(linear, {{{8, 5, 8}, predict_appeal(linear, {8, 5, 8}), {0, 1, -1}}}) == doctest::Approx(0.0));
  CHECK(appeal_gradient(AppealModel{}, {8, 5, 8}) == std::array<double, 3>{0, 0, 0});
}

TEST_CASE("published model on the bundled glasses, one term at a time") {
  const auto obs = bundled_observations();
  const auto m = published();
  // Glass 4 scored 10; the published model predicts 10.40 there.
  std::vector<Observation> g4;
  for (const auto& o : obs)
    if (o.dims == DesignParams{8, 7, 6} && o.appeal == 10.0) g4.push_back(o);
  REQUIRE(g4.size() == 1);
  CHECK(objective_terms(m, g4).appeal == doctest::Approx(0.16).epsilon(0.01));
  CHECK(std::isfinite(objective(m, obs)));
}

TEST_CASE("objective terms sum and match a literal evaluation") {
  const auto obs = bundled_observations();
  const auto m = published();
  double appeal = 0.0, derivative = 0.0;
  for (const auto& o : obs) {
    const double r = o.appeal - plug_in(m.a, o.dims.d1, o.dims.d2, o.dims.d3);
    appeal += r * r;
    const auto g = appeal_gradient(m, o.dims);
    for (std::size_t j = 0; j < 3; ++j) derivative += std::pow(o.deltas[j] - m.k[j] * g[j], 2);
  }
  const auto t = objective_terms(m, obs);
  CHECK(t.appeal == doctest::Approx(appeal).epsilon(1e-12));
  CHECK(t.derivative == doctest::Approx(derivative).epsilon(1e-12));
  CHECK(t.total() == objective(m, obs));
}

TEST_CASE("closed-form k") {
  const auto obs = bundled_observations();
  const auto m = published();
  const auto k = optimal_k(m.a, obs);
  for (std::size_t j = 0; j < 3; ++j) {
    double num = 0.0, den = 0.0;
    for (const auto& o : obs) {
      const double g = appeal_gradient(m, o.dims)[j];
      num += o.deltas[j] * g;
      den += g * g;
    }
    CHECK(k[j] == doctest::Approx(num / den).epsilon(1e-12));
  }
  const auto knn = optimal_k(m.a, obs, GradientForm::Exact, true);
  for (std::size_t j = 0; j < 3; ++j) CHECK(knn[j] == std::max(0.0, k[j]));
}

TEST_CASE("fit beats any model it could have reached") {
  Rng rng(2);
  std::vector<Observation> obs;
  const auto truth = random_model(rng);
  for (int i = 0; i < 30; ++i) {
    Observation o;
    o.dims = {rng.uniform(4, 12), rng.uniform(2, 8), rng.uniform(5, 10)};
    o.appeal = predict_appeal(truth, o.dims);
    const auto g = appeal_gradient(truth, o.dims);
    for (std::size_t j = 0; j < 3; ++j) o.deltas[j] = g[j] > 0.1 ? 1 : (g[j] < -0.1 ? -1 : 0);
    obs.push_back(o);
  }
  FitOptions opt;
  opt.starts = 10;
  const auto fit = fit_appeal_model(obs, opt);
  AppealModel best_truth = truth;
  best_truth.k = optimal_k(truth.a, obs);
  CHECK(fit.objective <= objective(best_truth, obs) + 1e-9);
  CHECK(fit.objective == doctest::Approx(objective(fit.model, obs)).epsilon(1e-12));
  CHECK(fit.identifiability.constant_columns.empty());
  double sq = 0.0;
  for (double r : fit.appeal_residuals) sq += r * r;
  CHECK(sq == doctest::Approx(fit.terms.appeal).epsilon(1e-9));
}

TEST_CASE("ground truth on a full grid is recovered") {
  // Linear truth has constant gradients, so codes of +-1 are matched exactly by some k.
  AppealModel truth;
  truth.a = {0.8, -0.5, 0.25, 0, 0, 0, 0, 0, 0, 4.0};
  std::vector<Observation> obs;
  for (double d1 : {6.0, 8.0, 10.0})
    for (double d2 : {3.0, 5.0, 7.0})
      for (double d3 : {6.0, 8.0, 10.0}) obs.push_back({{d1, d2, d3}, predict_appeal(truth, {d1, d2, d3}), {1, -1, 1}});
  FitOptions opt;
  opt.starts = 10;
  const auto fit = fit_appeal_model(obs, opt);
  CHECK(fit.objective <= 1e-6);
  for (const auto& o : obs) CHECK(std::abs(predict_appeal(fit.model, o.dims) - o.appeal) <= 1e-3);

  // A curved truth with neutral codes: k = 0 absorbs the derivative term.
  AppealModel curved;
  curved.a = {0.3, 0.2, -0.1, -0.05, 0.04, -0.03, 0.02, -0.01, 0.015, 2.0};
  for (auto& o : obs) {
    o.appeal = predict_appeal(curved, o.dims);
    o.deltas = {0, 0, 0};
  }
  const auto fit2 = fit_appeal_model(obs, opt);
  CHECK(fit2.objective <= 1e-6);
  for (const auto& o : obs) CHECK(std::abs(predict_appeal(fit2.model, o.dims) - o.appeal) <= 1e-3);
}

TEST_CASE("bundled data: refit dominates and the sign pattern holds") {
  const auto obs = bundled_observations();
  const auto fit = fit_appeal_model(obs);
  const auto ref = published();
  CHECK(fit.objective < objective(ref, obs));
  AppealModel ref_best = ref;
  ref_best.k = optimal_k(ref.a, obs);
  CHECK(fit.objective < objective(ref_best, obs));

  int d2_up = 0, d3_down = 0;
  for (const auto& o : obs) {
    const auto g = appeal_gradient(fit.model, o.dims);
    d2_up += g[1] >= 0.0;
    d3_down += g[2] <= 0.0;
  }
  CHECK(d2_up >= 13);
  CHECK(d3_down >= 16);

  CHECK(fit.identifiability.constant_columns == std::vector<std::string>{"d1"});
  CHECK_FALSE(fit.identifiability.collinear_groups.empty());

  // Local optimality: no small move of any of the 13 parameters lowers the objective.
  const double base = total_with(fit.model, obs);
  for (std::size_t p = 0; p < 13; ++p) {
    for (double step : {-1e-4, 1e-4}) {
      AppealModel moved = fit.model;
      if (p < 10) moved.a[p] += step;
      else moved.k[p - 10] += step;
      CHECK(total_with(moved, obs) >= base - 1e-9);
    }
  }
}

TEST_CASE("k_nonneg keeps the factors non-negative") {
  FitOptions opt;
  opt.starts = 10;
  opt.k_nonneg = true;
  const auto fit = fit_appeal_model(bundled_observations(), opt);
  for (double k : fit.model.k) CHECK(k >= 0.0);
}

TEST_CASE("constant appeal") {
  auto obs = bundled_observations();
  for (auto& o : obs) {
    o.appeal = 5.0;
    o.deltas = {0, 0, 0};
  }
  FitOptions opt;
  opt.starts = 4;
  const auto fit = fit_appeal_model(obs, opt);
  CHECK(fit.objective <= 1e-9);
  for (const auto& o : obs) CHECK(predict_appeal(fit.model, o.dims) == doctest::Approx(5.0).epsilon(1e-4));
}

TEST_CASE("input checks") {
  const auto obs = bundled_observations();
  std::vector<Observation> same(5, obs[0]);
  CHECK_THROWS_AS(fit_appeal_model(same), InsufficientVariation);
  FitOptions no_ridge;
  no_ridge.ridge = 0.0;
  CHECK_THROWS_AS(fit_appeal_model(obs, no_ridge), InsufficientVariation);
  CHECK_THROWS_AS(fit_appeal_model({}), InvalidInput);
  auto bad = obs;
  bad[0].deltas[1] = 2;
  CHECK_THROWS_AS(fit_appeal_model(bad), RangeError);
  CHECK_THROWS_AS(load_model(nlohmann::json{{"a", {1, 2}}, {"k", {1, 2, 3}}}), ParseError);
}

TEST_CASE("parallel fit matches the serial reference bit for bit") {
  const auto obs = bundled_observations();
  FitOptions opt;
  opt.starts = 12;
  opt.seed = 3;
  const auto a = fit_appeal_model(obs, opt);
  const auto b = fit_appeal_model_reference(obs, opt);
  CHECK(a.model.a == b.model.a);
  CHECK(a.model.k == b.model.k);
  CHECK(a.objective == b.objective);
  CHECK(a.best_start == b.best_start);
  CHECK(fit_json(a, GradientForm::Exact) == fit_json(b, GradientForm::Exact));
}

TEST_CASE("model json round-trip") {
  const auto m = published();
  const auto back = load_model(model_json(m));
  CHECK(back.a == m.a);
  CHECK(back.k == m.k);
}
