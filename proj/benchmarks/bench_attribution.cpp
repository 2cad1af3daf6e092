#include <benchmark/benchmark.h>

#include "gatt/attribution.hpp"
#include "gatt/dataset.hpp"
#include "gatt/engine.hpp"
#include "gatt/model.hpp"

namespace {

using namespace gatt;

struct Fixture {
  Graph graph;
  GatModel model;
  AttentionStack stack;

  Fixture() {
    const DatasetBundle bundle = generate_infection(7);
    graph = add_self_loops(bundle.graph);
    model = init_model(7, {graph.feature_dim(), 16, 16, 5}, {1, 1, 1});
    stack = extract_attention(model, graph);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Forward(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(f.model, f.graph));
  }
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

void BM_ContextPrecompute(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    AttributionContext ctx(f.stack, f.graph);
    benchmark::DoNotOptimize(ctx.num_layers());
  }
}
BENCHMARK(BM_ContextPrecompute)->Unit(benchmark::kMillisecond);

void BM_GattPerTarget(benchmark::State& state) {
  const Fixture& f = fixture();
  const AttributionContext ctx(f.stack, f.graph);
  int v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctx.gatt_scores(v));
    v = (v + 1) % f.graph.num_nodes;
  }
}
BENCHMARK(BM_GattPerTarget)->Unit(benchmark::kMicrosecond);

void BM_Gatt100Targets(benchmark::State& state) {
  const Fixture& f = fixture();
  const AttributionContext ctx(f.stack, f.graph);
  for (auto _ : state) {
    for (int v = 0; v < 100; ++v) {
      benchmark::DoNotOptimize(ctx.gatt_scores(v));
    }
  }
}
BENCHMARK(BM_Gatt100Targets)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
