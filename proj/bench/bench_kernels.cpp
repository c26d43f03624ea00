// Serial reference kernels against their OpenMP counterparts on the bundled data.
#include <benchmark/benchmark.h>

#include "formsense/appeal.hpp"
#include "formsense/io.hpp"
#include "formsense/mds.hpp"
#include "formsense/surface.hpp"

using namespace formsense;

namespace {

const Dissimilarities& bundled_dissimilarities() {
  static const auto d = Dissimilarities::from_matrix(load_matrix(read_file(fixture_dir() / "dissim.csv")));
  return d;
}

const std::vector<Observation>& bundled_observations() {
  static const auto obs = [] {
    const auto rules_text = read_file(fixture_dir() / "rules.csv");
    return make_observations(load_appeal(read_file(fixture_dir() / "appeal.csv")), load_rules(rules_text),
                             load_dims(rules_text));
  }();
  return obs;
}

const ResponseSurface& bundled_surface() {
  static const auto s =
      response_surface(load_model(nlohmann::json::parse(read_file(fixture_dir() / "reference_model.json"))), 8.0);
  return s;
}

void BM_MdsReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_mds_reference(bundled_dissimilarities(), MdsOptions{}));
}
void BM_MdsParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_mds(bundled_dissimilarities(), MdsOptions{}));
}

void BM_FitReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_appeal_model_reference(bundled_observations()));
}
void BM_FitParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fit_appeal_model(bundled_observations()));
}

void BM_GridReference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(surface_grid_reference(bundled_surface(), {3, 7}, {6, 9.5}, n, n));
}
void BM_GridParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(surface_grid(bundled_surface(), {3, 7}, {6, 9.5}, n, n));
}

}  // namespace

BENCHMARK(BM_MdsReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MdsParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridReference)->Arg(50)->Arg(500)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GridParallel)->Arg(50)->Arg(500)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
