#include <benchmark/benchmark.h>

#include <vector>

#include "indexins/numerics.hpp"
#include "indexins/payout.hpp"
#include "indexins/solvency.hpp"
#include "indexins/utility.hpp"
#include "synthetic.hpp"

using namespace indexins;

namespace {

const ClaimDataset& claims(std::size_t n) {
  static std::vector<std::pair<std::size_t, ClaimDataset>> cache;
  for (const auto& [k, ds] : cache)
    if (k == n) return ds;
  cache.emplace_back(n, fixtures::synthetic_claims({.claims = n, .seed = 5}));
  return cache.back().second;
}

void bm_normal_inverse(benchmark::State& state) {
  double eps = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(std_normal_survival_inv(eps));
    eps = eps < 0.4 ? eps * 1.5 : 1e-6;
  }
}
BENCHMARK(bm_normal_inverse);

void bm_fit(benchmark::State& state, Method method) {
  const ClaimDataset& ds = claims(static_cast<std::size_t>(state.range(0)));
  const Hyperparameters h = Hyperparameters::defaults(method);
  for (auto _ : state) benchmark::DoNotOptimize(fit_conditional_mean(ds, method, h, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(bm_fit, linear, Method::linear)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_fit, tree, Method::tree)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_fit, boosted, Method::boosted)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_fit, forest, Method::forest)->Arg(10000)->Unit(benchmark::kMillisecond);

void bm_laplace_psi(benchmark::State& state) {
  const ClaimDataset& ds = claims(10000);
  for (auto _ : state) benchmark::DoNotOptimize(laplace_psi(ds, 0.1));
}
BENCHMARK(bm_laplace_psi);

void bm_preference_curve(benchmark::State& state) {
  const ClaimDataset& ds = claims(10000);
  const PayoutModel tree =
      fit_conditional_mean(ds, Method::tree, Hyperparameters::defaults(Method::tree), 1);
  std::vector<double> grid;
  for (int k = 1; k <= state.range(0); ++k) grid.push_back(0.02 * k);
  for (auto _ : state) benchmark::DoNotOptimize(PreferenceCurve(ds, tree, grid, 0.9));
}
BENCHMARK(bm_preference_curve)->Arg(20)->Unit(benchmark::kMillisecond);

void bm_simulate_ruin(benchmark::State& state) {
  const ClaimDataset& ds = claims(10000);
  const PayoutModel tree =
      fit_conditional_mean(ds, Method::tree, Hyperparameters::defaults(Method::tree), 1);
  RuinScenario sc;
  sc.n = 4000;
  sc.theta = 0.18;
  sc.trials = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_ruin(ds, tree, sc));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_simulate_ruin)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
