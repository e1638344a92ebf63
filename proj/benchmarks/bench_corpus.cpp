#include <benchmark/benchmark.h>

#include <random>

#include "cgraph/corpus.hpp"

using namespace cgraph;

namespace {

std::vector<CorpusDocument> synthetic_corpus(std::size_t docs) {
  std::mt19937_64 rng(7);
  std::vector<CorpusDocument> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    for (int w = 0; w < 60; ++w) text += "term" + std::to_string(rng() % 2000) + " ";
    out.push_back({d, std::move(text), "bench"});
  }
  return out;
}

}  // namespace

void BM_BuildIndex(benchmark::State& state) {
  const auto docs = synthetic_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(RetrievalIndex(docs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->RangeMultiplier(4)->Range(256, 16384);

void BM_Retrieve(benchmark::State& state) {
  const RetrievalIndex index(synthetic_corpus(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(index.retrieve("term12 term345 term1999", 3));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(4)->Range(256, 16384);
