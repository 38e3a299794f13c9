#include <benchmark/benchmark.h>

#include <random>
#include <unordered_set>

#include "dgat/layers.hpp"
#include "dgat/tape.hpp"

namespace {

using namespace dgat;

struct Fixture {
  DirectedGraph graph;
  Matrix features;
  LayerTopology topo;
  ModelConfig cfg;
  ParamStore params;

  Fixture(LayerKind kind, int n, double avg_deg, int d) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> node(0, n - 1);
    std::vector<Edge> edges;
    std::unordered_set<int64_t> seen;
    int target_edges = static_cast<int>(n * avg_deg);
    while (static_cast<int>(edges.size()) < target_edges) {
      int s = node(rng), t = node(rng);
      if (s == t) continue;
      int64_t key = (static_cast<int64_t>(s) << 32) | t;
      if (!seen.insert(key).second) continue;
      edges.push_back({s, t});
    }
    graph = DirectedGraph::build(n, edges);
    features = Matrix(n, d);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : features.data) v = gauss(rng);
    cfg.kind = kind;
    cfg.hidden_dim = d;
    topo = build_topology(graph.with_self_loops());
    params = init_params(cfg, d, 7);
  }
};

void run_forward_backward(benchmark::State& state, LayerKind kind) {
  Fixture fx(kind, static_cast<int>(state.range(0)), 5.0, 16);
  std::vector<int> train_ids;
  std::vector<int> labels;
  for (int i = 0; i < fx.graph.num_nodes(); i += 2) {
    train_ids.push_back(i);
    labels.push_back(i % 4 == 0 ? 1 : 0);
  }
  for (auto _ : state) {
    fx.params.zero_grads();
    Tape tape;
    Tensor logits = model_logits(tape, fx.topo, tape.constant(fx.features), fx.cfg, fx.params);
    Tensor loss = tape.softmax_cross_entropy(tape.gather_rows(logits, train_ids), labels,
                                             {1.0, 1.0});
    tape.backward(loss);
    benchmark::DoNotOptimize(tape.value(loss).data[0]);
  }
}

void BM_Gat(benchmark::State& state) { run_forward_backward(state, LayerKind::kGat); }
void BM_Dgat(benchmark::State& state) { run_forward_backward(state, LayerKind::kDgat); }
void BM_Dedgat(benchmark::State& state) { run_forward_backward(state, LayerKind::kDedgat); }

}  // namespace

BENCHMARK(BM_Gat)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dgat)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Dedgat)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
