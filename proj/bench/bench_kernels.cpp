// Serial reference against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include "vrjp/graph.hpp"
#include "vrjp/green.hpp"
#include "vrjp/potential.hpp"
#include "vrjp/replicas.hpp"

namespace {

vrjp::WeightedGraph wired(int dimension, int half_side) {
  vrjp::BoxSpec spec;
  spec.dimension = dimension;
  spec.half_side = half_side;
  return vrjp::wire_box(vrjp::build_box(spec, 1.0, 1.0), 1.0);
}

double diagonal_sum(const vrjp::WeightedGraph& g, vrjp::Rng& rng) {
  const auto s = vrjp::sample_nu(g, rng);
  return vrjp::green(vrjp::assemble_h(g, s.beta)).values.trace();
}

void BM_replicas_serial(benchmark::State& state) {
  const auto g = wired(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = vrjp::map_replicas_serial<double>(256, 1, [&](vrjp::Rng& rng, std::size_t) { return diagonal_sum(g, rng); });
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_replicas_parallel(benchmark::State& state) {
  const auto g = wired(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = vrjp::map_replicas<double>(256, 1, 0, [&](vrjp::Rng& rng, std::size_t) { return diagonal_sum(g, rng); });
    benchmark::DoNotOptimize(out.data());
  }
}

// Positive diagonal well away from the spectral edge so the expansion is meaningful.
std::vector<double> flat_beta(const vrjp::WeightedGraph& g) { return std::vector<double>(g.vertex_count(), 4.0); }

void BM_expansion_serial(benchmark::State& state) {
  const auto g = wired(2, static_cast<int>(state.range(0)));
  const auto beta = flat_beta(g);
  for (auto _ : state) benchmark::DoNotOptimize(vrjp::rw_expansion_serial(g, beta, 200).data());
}

void BM_expansion_parallel(benchmark::State& state) {
  const auto g = wired(2, static_cast<int>(state.range(0)));
  const auto beta = flat_beta(g);
  for (auto _ : state) benchmark::DoNotOptimize(vrjp::rw_expansion(g, beta, 200, 0).data());
}

}  // namespace

BENCHMARK(BM_replicas_serial)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicas_parallel)->Arg(1)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_expansion_serial)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_expansion_parallel)->Arg(3)->Arg(7)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
