#include "dgat/explain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "dgat/tape.hpp"
#include "dgat/train.hpp"

namespace dgat {

Neighborhood extract_neighborhood(const DirectedGraph& g, NodeId center, int hops) {
  if (center < 0 || center >= g.num_nodes())
    throw std::invalid_argument("extract_neighborhood: center out of range");
  if (hops < 1) throw std::invalid_argument("extract_neighborhood: hops must be >= 1");

  Neighborhood nb;
  std::unordered_map<NodeId, NodeId> local;
  auto add_node = [&](NodeId orig) {
    local.emplace(orig, static_cast<NodeId>(nb.nodes.size()));
    nb.nodes.push_back(orig);
  };
  add_node(center);
  std::deque<std::pair<NodeId, int>> queue{{center, 0}};
  while (!queue.empty()) {
    auto [u, d] = queue.front();
    queue.pop_front();
    if (d == hops) continue;
    auto visit = [&](NodeId v) {
      if (!local.count(v)) {
        add_node(v);
        queue.emplace_back(v, d + 1);
      }
    };
    for (auto [v, e] : g.out_neighbors(u)) visit(v);
    for (auto [v, e] : g.in_neighbors(u)) visit(v);
  }

  std::vector<Edge> sub_edges;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    Edge ed = g.edge(e);
    auto si = local.find(ed.src);
    auto di = local.find(ed.dst);
    if (si == local.end() || di == local.end()) continue;
    sub_edges.push_back({si->second, di->second});
    nb.edge_ids.push_back(e);
  }
  nb.sub = DirectedGraph::build(static_cast<int>(nb.nodes.size()), sub_edges);
  nb.local_target = 0;
  return nb;
}

namespace {

Matrix gather_features(const Matrix& features, const std::vector<NodeId>& nodes) {
  Matrix out(static_cast<int>(nodes.size()), features.cols);
  for (size_t i = 0; i < nodes.size(); ++i)
    for (int j = 0; j < features.cols; ++j)
      out.at(static_cast<int>(i), j) = features.at(nodes[i], j);
  return out;
}

// Full-mask tensor over the prepared subgraph: learned/sigmoided weights on
// real edges, constant 1 on self loops the model added.
Tensor full_mask(Tape& tape, Tensor real_mask, int num_prepared_edges) {
  int n_loops = num_prepared_edges - real_mask.rows;
  if (n_loops == 0) return real_mask;
  Tensor ones = tape.constant(Matrix::filled(n_loops, 1, 1.0));
  return tape.concat_rows(real_mask, ones);
}

}  // namespace

std::vector<double> target_probs(const Neighborhood& nb, const Matrix& features,
                                 const ModelConfig& cfg, const ParamStore& params,
                                 const std::vector<double>* mask) {
  DirectedGraph prepared = cfg.self_loops ? nb.sub.with_self_loops() : nb.sub;
  LayerTopology topo = build_topology(prepared);
  Matrix sub_features = gather_features(features, nb.nodes);

  Tape tape;
  tape.set_params_frozen(true);
  Tensor mask_tensor;
  Tensor* mask_ptr = nullptr;
  if (mask) {
    if (static_cast<int>(mask->size()) != nb.sub.num_edges())
      throw std::invalid_argument("target_probs: mask length must match subgraph edge count");
    Matrix m(nb.sub.num_edges(), 1, *mask);
    mask_tensor = full_mask(tape, tape.constant(std::move(m)), topo.num_edges);
    mask_ptr = &mask_tensor;
  }
  Tensor logits = model_logits(tape, topo, tape.constant(sub_features), cfg,
                               const_cast<ParamStore&>(params), mask_ptr);
  Tensor probs = tape.row_softmax(logits);
  const Matrix& pv = tape.value(probs);
  std::vector<double> out(cfg.num_classes);
  for (int c = 0; c < cfg.num_classes; ++c) out[c] = pv.at(nb.local_target, c);
  return out;
}

EdgeMask explain_node(const DirectedGraph& g, const Matrix& features, const ModelConfig& cfg,
                      const ParamStore& params, NodeId target, const ExplainConfig& xcfg) {
  if (params.size() == 0) throw std::invalid_argument("explain_node: model not trained");
  Neighborhood nb = extract_neighborhood(g, target, xcfg.hops);
  const int e_sub = nb.sub.num_edges();

  EdgeMask result;
  result.target = target;
  result.edge_ids = nb.edge_ids;
  if (e_sub == 0) return result;

  DirectedGraph prepared = cfg.self_loops ? nb.sub.with_self_loops() : nb.sub;
  LayerTopology topo = build_topology(prepared);
  Matrix sub_features = gather_features(features, nb.nodes);

  std::vector<double> ref = target_probs(nb, features, cfg, params);
  int predicted = static_cast<int>(std::max_element(ref.begin(), ref.end()) - ref.begin());

  ParamStore mask_store;
  {
    std::mt19937_64 rng(xcfg.seed);
    std::normal_distribution<double> init(0.0, 0.1);
    Matrix logits(e_sub, 1);
    for (double& v : logits.data) v = init(rng);
    mask_store.insert("mask_logits", std::move(logits));
  }

  TrainConfig opt;
  opt.learning_rate = xcfg.learning_rate;
  opt.weight_decay = 0.0;
  std::vector<double> unit_weights(cfg.num_classes, 1.0);

  for (int epoch = 1; epoch <= xcfg.epochs; ++epoch) {
    mask_store.zero_grads();
    Tape tape;
    tape.set_params_frozen(false);
    Tensor logits_param = tape.param(mask_store, "mask_logits");
    Tensor mask_real = tape.sigmoid(logits_param);
    tape.set_params_frozen(true);  // model weights stay fixed
    Tensor mask = full_mask(tape, mask_real, topo.num_edges);
    Tensor out = model_logits(tape, topo, tape.constant(sub_features), cfg,
                              const_cast<ParamStore&>(params), &mask);
    Tensor target_logits = tape.gather_rows(out, {nb.local_target});
    Tensor ce = tape.softmax_cross_entropy(target_logits, {predicted}, unit_weights);
    Tensor loss = tape.add(ce, tape.scale(tape.mean(mask_real), xcfg.sparsity_coeff));
    loss = tape.add(loss, tape.scale(tape.mean_binary_entropy(mask_real), xcfg.entropy_coeff));
    tape.backward(loss);
    adam_step(mask_store, opt, epoch);
  }

  const Matrix& final_logits = mask_store.at("mask_logits").value;
  result.weight.resize(e_sub);
  for (int e = 0; e < e_sub; ++e)
    result.weight[e] = 1.0 / (1.0 + std::exp(-final_logits.data[e]));
  return result;
}

}  // namespace dgat
