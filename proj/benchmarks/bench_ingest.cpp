#include <benchmark/benchmark.h>

#include "explainer/ingest.hpp"
#include "explainer/scenario_sim.hpp"

using namespace explainer;

static void BM_IngestScenario(benchmark::State& state) {
  ScenarioSpec spec;
  spec.run = Run::kR5;
  spec.noise_repeat = static_cast<std::size_t>(state.range(0));
  auto corpus = generate(spec);
  ReferenceEmbedder emb;
  for (auto _ : state) {
    VectorStore store;
    IngestPipeline p(emb, store);
    for (const auto& r : corpus.records) p.submit(r);
    p.drain_all();
    benchmark::DoNotOptimize(store.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.records.size()));
}
BENCHMARK(BM_IngestScenario)->Arg(0)->Arg(20)->Arg(200);

BENCHMARK_MAIN();
