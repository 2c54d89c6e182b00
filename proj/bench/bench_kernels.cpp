// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "negoforge/dynamic_agent.hpp"
#include "negoforge/opponents.hpp"
#include "negoforge/parallel.hpp"
#include "negoforge/problem_gen.hpp"
#include "negoforge/random_forest.hpp"

using namespace negoforge;

namespace {

struct SessionBatch {
  std::vector<BargainingProblem> problems;
  std::vector<OpponentSpec> opponents;

  SessionBatch() {
    ProblemGenSpec gen;
    for (std::uint64_t k = 0; k < 8; ++k) problems.push_back(generate_problem(gen, k));
    opponents = default_roster();
  }

  double play(std::size_t i) const {
    const auto& p = problems[i % problems.size()];
    const auto& o = opponents[(i / problems.size()) % opponents.size()];
    DynamicAgent ours{AgentConfiguration{}};
    auto them = instantiate(o, derive_seed(7, i));
    return run_session(ours, *them, p, 100, derive_seed(11, i)).utility_of(Side::A);
  }
};

const SessionBatch& batch() {
  static const SessionBatch b;
  return b;
}

void BM_SessionsSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto r = serial_map<double>(n, [](std::size_t i) { return batch().play(i); });
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_SessionsParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int workers = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto r = parallel_map<double>(n, [](std::size_t i) { return batch().play(i); }, workers);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

void BM_ForestFit(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  FeatureMatrix x(2000, 14);
  std::vector<double> y(2000);
  Rng rng(3);
  for (std::size_t r = 0; r < x.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.cols; ++c) {
      x.data[r * x.cols + c] = uniform01(rng);
      s += x.data[r * x.cols + c];
    }
    y[r] = s + 0.1 * uniform01(rng);
  }
  ForestOptions options;
  options.workers = workers;
  for (auto _ : state) {
    RegressionForest forest;
    forest.fit(x, y, options, 1);
    benchmark::DoNotOptimize(forest.size());
  }
}

}  // namespace

BENCHMARK(BM_SessionsSerial)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SessionsParallel)->Args({64, 2})->Args({64, 4})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ForestFit)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
