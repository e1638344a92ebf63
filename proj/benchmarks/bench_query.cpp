#include <benchmark/benchmark.h>

#include "cgraph/query.hpp"

using namespace cgraph;

void BM_ParseCommand(benchmark::State& state) {
  const std::string input = R"(SHORTEST "word distributions" -> "sentence simplification")";
  for (auto _ : state) benchmark::DoNotOptimize(parse(input));
}
BENCHMARK(BM_ParseCommand);

void BM_ParseScript(benchmark::State& state) {
  std::string script;
  for (int i = 0; i < state.range(0); ++i) script += "NEIGHBORS \"concept " + std::to_string(i) + "\" IN HOPS 2\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_script(script));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ParseScript)->RangeMultiplier(8)->Range(8, 4096);

void BM_PrintRoundTrip(benchmark::State& state) {
  const GraphQuery q = Prerequisites{R"(name with "quotes" and \ slashes)", 3};
  for (auto _ : state) benchmark::DoNotOptimize(parse(print(q)));
}
BENCHMARK(BM_PrintRoundTrip);
