#include <benchmark/benchmark.h>

#include <random>

#include "cgraph/graph.hpp"

using namespace cgraph;

namespace {

ConceptGraph random_dag(std::size_t n, double density) {
  std::mt19937_64 rng(42);
  std::bernoulli_distribution coin(density);
  ConceptGraph g;
  for (std::size_t i = 1; i <= n; ++i) g.add_concept({ConceptId(static_cast<std::int64_t>(i)), "c" + std::to_string(i), ""});
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      if (coin(rng)) g.add_edge(ConceptId(static_cast<std::int64_t>(i)), ConceptId(static_cast<std::int64_t>(j)));
    }
  }
  return g;
}

}  // namespace

void BM_HasPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_dag(n, 4.0 / static_cast<double>(n));
  const ConceptId first(1), last(static_cast<std::int64_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(has_path(g, first, last));
}
BENCHMARK(BM_HasPath)->RangeMultiplier(4)->Range(64, 4096);

void BM_ShortestPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto g = random_dag(n, 4.0 / static_cast<double>(n));
  const ConceptId first(1), last(static_cast<std::int64_t>(n));
  for (auto _ : state) benchmark::DoNotOptimize(shortest_path(g, first, last));
}
BENCHMARK(BM_ShortestPath)->RangeMultiplier(4)->Range(64, 4096);

// Depth-bounded enumeration grows with the number of paths, so keep graphs
// LectureBank-sized.
void BM_PrerequisitePaths(benchmark::State& state) {
  const auto g = random_dag(322, 0.01);
  const ConceptId target(322);
  const auto depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(prerequisite_paths(g, target, depth));
}
BENCHMARK(BM_PrerequisitePaths)->DenseRange(1, 4);

void BM_Neighbors(benchmark::State& state) {
  const auto g = random_dag(322, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(neighbors(g, ConceptId(161), Direction::In, 2));
}
BENCHMARK(BM_Neighbors);
