#include <benchmark/benchmark.h>

#include "explainer/embedder.hpp"

using namespace explainer;

static void BM_ReferenceEmbed(benchmark::State& state) {
  ReferenceEmbedder emb(static_cast<std::size_t>(state.range(0)));
  const std::string text =
      "Obstacle detected during navigation to waypoint with ID:7 - Distance to the point increased from: 0.07 "
      "meters to 0.10 meters";
  for (auto _ : state) benchmark::DoNotOptimize(emb.embed(text));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ReferenceEmbed)->Arg(64)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
