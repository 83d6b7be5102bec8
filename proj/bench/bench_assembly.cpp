// Row assembly with the OpenMP row map against the serial reference loop.

#include <benchmark/benchmark.h>

#include <map>

#include "surfpde/interface.hpp"
#include "surfpde/operators.hpp"

using namespace surfpde;

namespace {

const PointCloud& torus_cloud(Index N) {
  static std::map<Index, PointCloud> cache;
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, sample_cloud_total(semi_torus(), N, 7)).first;
  return it->second;
}

template <Execution exec>
void interior(benchmark::State& state) {
  const PointCloud& cloud = torus_cloud(state.range(0));
  const AutotuneConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_interior(cloud, cfg, exec));
  state.SetItemsProcessed(state.iterations() * cloud.n_interior);
}

template <Execution exec>
void boundary(benchmark::State& state) {
  const PointCloud& cloud = torus_cloud(state.range(0));
  const AutotuneConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_boundary(cloud, cfg, true, exec));
  state.SetItemsProcessed(state.iterations() * (cloud.size() - cloud.n_interior));
}

template <Execution exec>
void interface_system(benchmark::State& state) {
  const InterfaceProblem pb = paraboloid_star_problem();
  const InterfaceCloud cloud = sample_interface_cloud(pb, state.range(0), 7);
  const AutotuneConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(assemble_interface_system(pb, cloud, cfg, exec));
  state.SetItemsProcessed(state.iterations() * cloud.size());
}

}  // namespace

BENCHMARK(interior<Execution::Serial>)->Arg(1600)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(interior<Execution::Parallel>)->Arg(1600)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(boundary<Execution::Serial>)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(boundary<Execution::Parallel>)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(interface_system<Execution::Serial>)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(interface_system<Execution::Parallel>)->Arg(6400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
