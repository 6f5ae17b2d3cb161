#include <benchmark/benchmark.h>

#include "sem/generate.hpp"
#include "sem/partition.hpp"
#include "sem/routing.hpp"
#include "sem/search.hpp"

namespace {

sem::ServiceEntity entity_of(std::size_t n, std::uint64_t seed) {
  sem::EntityParams p;
  p.size = {static_cast<sem::Units>(n), static_cast<sem::Units>(n)};
  p.density = 0.5;
  return sem::generate_service_entity(p, seed);
}

void BM_PartitionHeuristic(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const sem::ServiceEntity e = entity_of(n, 3);
  const sem::ProportionWeights pwv({0.4, 0.35, 0.25});
  const std::vector<sem::Units> caps(3, e.total_cpu_demand());
  for (auto _ : state) benchmark::DoNotOptimize(sem::partition_heuristic(e, pwv, {0.05}, caps, 1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PartitionHeuristic)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_PrecomputeKPaths(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  const sem::CpnTopology g = sem::generate_random_cpn(nodes, 2 * nodes, {100, 150}, {100, 150}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(sem::precompute_k_paths(g, 5));
}
BENCHMARK(BM_PrecomputeKPaths)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_ControllerSolve(benchmark::State& state) {
  const sem::CpnTopology g = sem::generate_random_cpn(30, 60, {100, 150}, {100, 150}, 7);
  const sem::PathTable table = sem::precompute_k_paths(g, 5);
  const sem::ServiceEntity e = entity_of(10, 11);
  sem::SearchContext ctx;
  ctx.entity = &e;
  ctx.topology = &g;
  ctx.table = &table;
  ctx.params.deterministic = true;
  ctx.params.max_iters = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sem::controller_solve(ctx));
}
BENCHMARK(BM_ControllerSolve)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
