#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "explainer/vector_store.hpp"

using namespace explainer;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = n(rng);
    norm += x * x;
  }
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

void BM_Retrieve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  VectorStore store;
  for (std::size_t i = 0; i < n; ++i) {
    EmbeddedEntry e;
    e.id = i + 1;
    e.vector.values = random_unit(rng, 256);
    store.insert(std::move(e));
  }
  EmbeddingVector q{random_unit(rng, 256)};
  RetrievalParams params{.k = k, .lambda = 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(store.retrieve(q, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_Retrieve)->Args({1000, 20})->Args({10000, 20})->Args({10000, 5})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
