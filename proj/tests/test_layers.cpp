#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dgat/grad_check.hpp"
#include "dgat/layers.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dgat;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data) v = gauss(rng);
  return m;
}

DirectedGraph random_graph(std::mt19937_64& rng, int n, double edge_prob) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng) < edge_prob) edges.push_back({i, j});
  return DirectedGraph::build(n, edges);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  REQUIRE(a.same_shape(b));
  double m = 0.0;
  for (size_t k = 0; k < a.data.size(); ++k) m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

Matrix forward_kind(const DirectedGraph& g, const Matrix& feats, const ModelConfig& cfg,
                    ParamStore& params) {
  Tape tape;
  LayerTopology topo = build_topology(cfg.self_loops ? g.with_self_loops() : g);
  Tensor logits = model_logits(tape, topo, tape.constant(feats), cfg, params);
  return tape.value(logits);
}

}  // namespace

TEST_CASE("count_parameters examples") {
  ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.hidden_dim = 8;
  cfg.num_classes = 2;

  cfg.kind = LayerKind::kGat;
  CHECK(count_parameters(cfg, 4, false) == 48);
  CHECK(count_parameters(cfg, 4, true) == 64);

  cfg.kind = LayerKind::kDgat;
  CHECK(count_parameters(cfg, 4, false) == 96);
  cfg.kind = LayerKind::kDedgat;
  CHECK(count_parameters(cfg, 4, false) == 96);

  cfg.kind = LayerKind::kGat;
  cfg.num_layers = 2;
  CHECK(count_parameters(cfg, 4, true) == 48 + 80 + 16);

  cfg.bias = true;
  cfg.num_layers = 1;
  CHECK(count_parameters(cfg, 4, true) == 48 + 8 + 16 + 2);
}

TEST_CASE("count_parameters matches init_params") {
  for (LayerKind kind : {LayerKind::kGat, LayerKind::kDgat, LayerKind::kDedgat}) {
    for (int layers : {1, 2, 3}) {
      for (bool bias : {false, true}) {
        ModelConfig cfg;
        cfg.kind = kind;
        cfg.num_layers = layers;
        cfg.hidden_dim = 5;
        cfg.num_classes = 3;
        cfg.bias = bias;
        ParamStore store = init_params(cfg, 7, 0);
        long long total = 0;
        for (const auto& [name, e] : store) total += static_cast<long long>(e.value.data.size());
        CHECK(total == count_parameters(cfg, 7, true));
      }
    }
  }
}

TEST_CASE("init_params is deterministic and Glorot-bounded") {
  ModelConfig cfg;
  cfg.kind = LayerKind::kDgat;
  cfg.bias = true;
  ParamStore a = init_params(cfg, 6, 42);
  ParamStore b = init_params(cfg, 6, 42);
  ParamStore c = init_params(cfg, 6, 43);
  bool all_equal = true, any_diff = false;
  for (const auto& [name, e] : a) {
    if (e.value.data != b.at(name).value.data) all_equal = false;
    if (e.value.data != c.at(name).value.data) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);

  double bound_w = std::sqrt(6.0 / (6 + 16));
  for (double v : a.at("layer0.W").value.data) CHECK(std::abs(v) <= bound_w);
  for (double v : a.at("layer0.bW").value.data) CHECK(v == 0.0);
  for (double v : a.at("head.bV").value.data) CHECK(v == 0.0);
}

TEST_CASE("isolated node with self loop: GAT output is its own projection") {
  ModelConfig cfg;
  cfg.kind = LayerKind::kGat;
  cfg.num_layers = 1;
  cfg.hidden_dim = 2;
  std::mt19937_64 rng(1);
  ParamStore params = init_params(cfg, 3, 5);
  params.insert("__unused", Matrix(1, 1));  // extra entries in the store are ignored
  Matrix feats = random_matrix(rng, 1, 3);

  auto g = DirectedGraph::build(1, {});
  Tape tape;
  LayerTopology topo = build_topology(g.with_self_loops());
  GatLayerRefs refs{tape.param(params, "layer0.W"), tape.param(params, "layer0.a"), {}};
  Matrix got = tape.value(gat_forward(tape, topo, tape.constant(feats), refs, 0.2));
  Matrix want = matmul(feats, params.at("layer0.W").value);
  CHECK(max_abs_diff(got, want) < 1e-12);
}

TEST_CASE("single directed edge: attention weights are softmax over two in-edges") {
  // graph 0 -> 1 with self loops; scalar features and identity projection
  auto g = DirectedGraph::build(2, {{0, 1}}).with_self_loops();
  Matrix feats(2, 1, {1.0, 3.0});
  Matrix W(1, 1, {1.0});
  Matrix a(2, 1, {1.0, 0.5});

  Tape tape;
  LayerTopology topo = build_topology(g);
  GatLayerRefs refs{tape.constant(W), tape.constant(a), {}};
  Matrix got = tape.value(gat_forward(tape, topo, tape.constant(feats), refs, 0.2));

  // node 0: only its self loop, weight 1
  CHECK(got.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  // node 1: scores are 1*3 + 0.5*1 = 3.5 (from 0) and 1*3 + 0.5*3 = 4.5 (self)
  auto att = oracle::softmax({3.5, 4.5});
  CHECK(got.at(1, 0) == doctest::Approx(att[0] * 1.0 + att[1] * 3.0).epsilon(1e-12));
}

TEST_CASE("layers match the dense loop oracle") {
  std::mt19937_64 rng(9);
  const int d_in = 4, d_out = 3;
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_graph(rng, 12, 0.2).with_self_loops();
    LayerTopology topo = build_topology(g);
    Matrix feats = random_matrix(rng, 12, d_in);
    Matrix W = random_matrix(rng, d_in, d_out);
    Matrix U = random_matrix(rng, d_in, d_out);
    Matrix a_t = random_matrix(rng, 2 * d_out, 1);
    Matrix a_s = random_matrix(rng, 2 * d_out, 1);

    {
      Tape tape;
      GatLayerRefs refs{tape.constant(W), tape.constant(a_t), {}};
      Matrix got = tape.value(gat_forward(tape, topo, tape.constant(feats), refs, 0.2));
      CHECK(max_abs_diff(got, oracle::gat_layer(g, feats, W, a_t, 0.2)) < 1e-10);
    }
    {
      Tape tape;
      DgatLayerRefs refs{tape.constant(W), tape.constant(U), tape.constant(a_t),
                         tape.constant(a_s), {}, {}};
      Matrix got = tape.value(dgat_forward(tape, topo, tape.constant(feats), refs, 0.2));
      CHECK(max_abs_diff(got, oracle::dgat_layer(g, feats, W, U, a_t, a_s, 0.2)) < 1e-10);
    }
    for (bool same_role : {false, true}) {
      Tape tape;
      DedgatLayerRefs refs{tape.constant(W), tape.constant(U), tape.constant(a_t),
                           tape.constant(a_s), {}, {}};
      Tensor f = tape.constant(feats);
      DualState st = dedgat_forward(tape, topo, {f, f}, refs, 0.2, nullptr, same_role);
      auto want = oracle::dedgat_layer(g, feats, feats, W, U, a_t, a_s, 0.2, same_role);
      CHECK(max_abs_diff(tape.value(st.t), want.t) < 1e-10);
      CHECK(max_abs_diff(tape.value(st.s), want.s) < 1e-10);
      Matrix fin = tape.value(finalize_dual(tape, st));
      for (size_t k = 0; k < fin.data.size(); ++k)
        CHECK(fin.data[k] == doctest::Approx(want.t.data[k] + want.s.data[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("tied DGAT parameters make the layer direction-symmetric") {
  // With U = W and a_s = a_t and no self loops, running DGAT on g and on the
  // reversed graph swaps the two branches, so the outputs must coincide.
  std::mt19937_64 rng(11);
  auto g = random_graph(rng, 15, 0.15);
  Matrix feats = random_matrix(rng, 15, 4);
  Matrix W = random_matrix(rng, 4, 3);
  Matrix a = random_matrix(rng, 6, 1);

  auto run = [&](const DirectedGraph& graph) {
    Tape tape;
    LayerTopology topo = build_topology(graph);
    DgatLayerRefs refs{tape.constant(W), tape.constant(W), tape.constant(a), tape.constant(a),
                       {}, {}};
    return tape.value(dgat_forward(tape, topo, tape.constant(feats), refs, 0.2));
  };
  CHECK(max_abs_diff(run(g), run(g.reversed())) < 1e-12);
}

TEST_CASE("two-node DEDGAT trace") {
  // Graph 0 -> 1, scalar embeddings, no self loops. With t = s = x:
  //   t'_1 = u * x_0 (only in-edge),  s'_0 = w * x_1 (only out-edge),
  //   t'_0 = s'_1 = 0, so h = (w x_1, u x_0).
  auto g = DirectedGraph::build(2, {{0, 1}});
  Matrix x(2, 1, {2.0, 5.0});
  double w = 1.5, u = -0.7;

  Tape tape;
  LayerTopology topo = build_topology(g);
  DedgatLayerRefs refs{tape.constant(Matrix(1, 1, {w})), tape.constant(Matrix(1, 1, {u})),
                       tape.constant(Matrix(2, 1, {0.3, 0.4})),
                       tape.constant(Matrix(2, 1, {-0.2, 0.1})), {}, {}};
  Tensor f = tape.constant(x);
  DualState st = dedgat_forward(tape, topo, {f, f}, refs, 0.2);
  Matrix h = tape.value(finalize_dual(tape, st));
  CHECK(h.at(0, 0) == doctest::Approx(w * 5.0).epsilon(1e-12));
  CHECK(h.at(1, 0) == doctest::Approx(u * 2.0).epsilon(1e-12));
  CHECK(tape.value(st.t).at(0, 0) == 0.0);
  CHECK(tape.value(st.s).at(1, 0) == 0.0);
}

TEST_CASE("model output is permutation equivariant") {
  std::mt19937_64 rng(13);
  auto g = random_graph(rng, 10, 0.2);
  Matrix feats = random_matrix(rng, 10, 3);
  std::vector<int> perm(10);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Edge> pedges;
  for (const Edge& e : g.edges()) pedges.push_back({perm[e.src], perm[e.dst]});
  auto pg = DirectedGraph::build(10, pedges);
  Matrix pfeats(10, 3);
  for (int i = 0; i < 10; ++i)
    for (int c = 0; c < 3; ++c) pfeats.at(perm[i], c) = feats.at(i, c);

  for (LayerKind kind : {LayerKind::kGat, LayerKind::kDgat, LayerKind::kDedgat}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.hidden_dim = 4;
    ParamStore params = init_params(cfg, 3, 21);
    Matrix out = forward_kind(g, feats, cfg, params);
    Matrix pout = forward_kind(pg, pfeats, cfg, params);
    for (int i = 0; i < 10; ++i)
      for (int c = 0; c < out.cols; ++c)
        CHECK(out.at(i, c) == doctest::Approx(pout.at(perm[i], c)).epsilon(1e-10));
  }
}

TEST_CASE("disconnected components do not influence each other") {
  // nodes 0-2 form one component, 3-5 another
  auto g = DirectedGraph::build(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}});
  std::mt19937_64 rng(15);
  Matrix feats = random_matrix(rng, 6, 3);
  Matrix feats2 = feats;
  for (int c = 0; c < 3; ++c) feats2.at(4, c) += 10.0;  // perturb the second component

  ModelConfig cfg;
  cfg.hidden_dim = 4;
  ParamStore params = init_params(cfg, 3, 3);
  Matrix a = forward_kind(g, feats, cfg, params);
  Matrix b = forward_kind(g, feats2, cfg, params);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < a.cols; ++c) CHECK(a.at(i, c) == b.at(i, c));
  bool changed = false;
  for (int i = 3; i < 6; ++i)
    for (int c = 0; c < a.cols; ++c)
      if (a.at(i, c) != b.at(i, c)) changed = true;
  CHECK(changed);
}

TEST_CASE("classify rows are probability distributions") {
  std::mt19937_64 rng(17);
  Tape tape;
  Tensor h = tape.constant(random_matrix(rng, 7, 4));
  Tensor v = tape.constant(random_matrix(rng, 4, 3));
  Matrix probs = tape.value(classify(tape, h, v));
  for (int i = 0; i < probs.rows; ++i) {
    double row = 0.0;
    for (int c = 0; c < probs.cols; ++c) {
      CHECK(probs.at(i, c) > 0.0);
      row += probs.at(i, c);
    }
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("edge mask of ones is a no-op; zeroing an edge only affects reachable rows") {
  std::mt19937_64 rng(19);
  auto g = random_graph(rng, 8, 0.25).with_self_loops();
  LayerTopology topo = build_topology(g);
  Matrix feats = random_matrix(rng, 8, 3);

  ModelConfig cfg;
  cfg.kind = LayerKind::kDedgat;
  cfg.num_layers = 1;
  cfg.hidden_dim = 4;
  ParamStore params = init_params(cfg, 3, 8);

  auto run = [&](const Matrix* mask) {
    Tape tape;
    Tensor m;
    if (mask) m = tape.constant(*mask);
    return tape.value(
        model_logits(tape, topo, tape.constant(feats), cfg, params, mask ? &m : nullptr));
  };
  Matrix base = run(nullptr);
  Matrix ones = Matrix::filled(g.num_edges(), 1, 1.0);
  CHECK(max_abs_diff(base, run(&ones)) < 1e-12);

  // pick a real (non-loop) edge and zero it out
  EdgeId victim = 0;
  while (g.edge(victim).src == g.edge(victim).dst) ++victim;
  Matrix masked = ones;
  masked.data[victim] = 0.0;
  Matrix out = run(&masked);
  int src = g.edge(victim).src, dst = g.edge(victim).dst;
  bool touched = false;
  for (int c = 0; c < out.cols; ++c)
    if (out.at(dst, c) != base.at(dst, c) || out.at(src, c) != base.at(src, c)) touched = true;
  CHECK(touched);
  for (int i = 0; i < out.rows; ++i) {
    if (i == src || i == dst) continue;
    for (int c = 0; c < out.cols; ++c) CHECK(out.at(i, c) == base.at(i, c));
  }
}

TEST_CASE("full-model gradients pass finite differences") {
  std::mt19937_64 rng(23);
  auto g = random_graph(rng, 6, 0.3);
  Matrix feats = random_matrix(rng, 6, 3);
  std::vector<int> labels = {0, 1, 0, 1, 1, 0};
  std::vector<int> ids = {0, 1, 2, 3, 4, 5};

  for (LayerKind kind : {LayerKind::kGat, LayerKind::kDgat, LayerKind::kDedgat}) {
    ModelConfig cfg;
    cfg.kind = kind;
    cfg.num_layers = 2;
    cfg.hidden_dim = 3;
    cfg.bias = true;
    LayerTopology topo = build_topology(g.with_self_loops());
    ParamStore params = init_params(cfg, 3, 31);
    auto report = grad_check(
        [&](Tape& t, ParamStore& p) {
          Tensor logits = model_logits(t, topo, t.constant(feats), cfg, p);
          return t.softmax_cross_entropy(t.gather_rows(logits, ids), labels, {1.0, 1.5});
        },
        params, 1e-5, 1e-4);
    INFO("kind=", layer_kind_name(kind), " max_rel_err=", report.max_rel_err);
    CHECK(report.passed);
  }
}
