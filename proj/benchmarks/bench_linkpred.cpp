#include <benchmark/benchmark.h>

#include <random>

#include "cgraph/linkpred.hpp"

using namespace cgraph;

namespace {

struct Instance {
  GcnModel model;
  Matrix features;
  Matrix adjacency;
  std::vector<IndexedPair> pairs;
};

// LectureBank NLP scale: 322 concepts with 768-dimensional embeddings.
Instance make_instance(std::size_t nodes, std::size_t dim) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Instance inst{GcnModel::initialize({dim, 256, {128}}, 1), Matrix(nodes, dim), Matrix::Zero(nodes, nodes), {}};
  for (Eigen::Index i = 0; i < inst.features.size(); ++i) inst.features.data()[i] = u(rng);
  for (std::size_t e = 0; e < 4 * nodes; ++e) {
    const auto s = rng() % nodes, t = rng() % nodes;
    if (s == t) continue;
    inst.adjacency(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = 1;
    inst.pairs.push_back({s, t, 1.0});
    inst.pairs.push_back({t, s, 0.0});
  }
  inst.adjacency = normalize_adjacency(inst.adjacency, true);
  return inst;
}

}  // namespace

void BM_GcnForward(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 768);
  for (auto _ : state) benchmark::DoNotOptimize(gcn_forward(inst.model, inst.features, inst.adjacency));
}
BENCHMARK(BM_GcnForward)->Arg(100)->Arg(322)->Unit(benchmark::kMillisecond);

void BM_GcnLossAndGradients(benchmark::State& state) {
  const auto inst = make_instance(static_cast<std::size_t>(state.range(0)), 768);
  GcnGradients grads;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gcn_loss(inst.model, inst.features, inst.adjacency, inst.pairs, &grads));
  }
}
BENCHMARK(BM_GcnLossAndGradients)->Arg(100)->Arg(322)->Unit(benchmark::kMillisecond);
