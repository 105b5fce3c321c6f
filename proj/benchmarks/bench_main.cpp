#include <map>

#include <benchmark/benchmark.h>

#include "rpres/eigensolver.hpp"
#include "rpres/hopf_sde.hpp"
#include "rpres/partition.hpp"
#include "rpres/transfer.hpp"

namespace {

rpres::SimConfig sim_config(std::int64_t n)
{
  rpres::SimConfig c;
  c.n_samples = n;
  c.spinup_steps = 0;
  return c;
}

const rpres::Trajectory& standardized_path()
{
  static const rpres::Trajectory t = [] {
    auto raw = rpres::simulate({-0.2, 1.0, 0.0, 0.1}, sim_config(200'000));
    return rpres::standardize(raw).trajectory;
  }();
  return t;
}

const rpres::TransitionMatrix& hopf_matrix(std::int64_t boxes)
{
  static std::map<std::int64_t, rpres::TransitionMatrix> cache;
  auto it = cache.find(boxes);
  if (it == cache.end()) {
    rpres::GridSpec g;
    g.n_per_dim = {boxes, boxes};
    const auto& t = standardized_path();
    auto counts = rpres::count_transitions(g, t, 40);
    it = cache.emplace(boxes, rpres::normalize(counts, t.sampling_interval)).first;
  }
  return it->second;
}

void simulate(benchmark::State& state)
{
  const auto cfg = sim_config(state.range(0));
  for (auto _ : state) {
    auto t = rpres::simulate({-0.2, 1.0, 0.0, 0.1}, cfg);
    benchmark::DoNotOptimize(t.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(simulate)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void count_transitions(benchmark::State& state)
{
  rpres::GridSpec g;
  const auto& t = standardized_path();
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    auto c = rpres::count_transitions(g, t, 40, threads);
    benchmark::DoNotOptimize(c.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(count_transitions)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void eigenpairs(benchmark::State& state, rpres::EigenMethod method)
{
  const auto& T = hopf_matrix(state.range(0));
  rpres::EigenOptions opts;
  opts.method = method;
  opts.krylov_dim = 60;
  for (auto _ : state) {
    auto pairs = rpres::leading_eigenpairs(T, opts);
    benchmark::DoNotOptimize(pairs.data());
  }
  state.counters["dim"] = static_cast<double>(T.dim());
}
BENCHMARK_CAPTURE(eigenpairs, arnoldi, rpres::EigenMethod::Arnoldi)
    ->Arg(30)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(eigenpairs, dense, rpres::EigenMethod::Dense)
    ->Arg(30)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
