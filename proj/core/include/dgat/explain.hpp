#pragma once

#include <vector>

#include "dgat/graph.hpp"
#include "dgat/layers.hpp"
#include "dgat/matrix.hpp"
#include "dgat/param_store.hpp"

namespace dgat {

struct ExplainConfig {
  int hops = 2;  // subgraph radius; match the model depth
  int epochs = 100;
  double learning_rate = 0.05;
  double sparsity_coeff = 0.005;
  double entropy_coeff = 0.1;
  unsigned long long seed = 0;
};

// Per-edge importance scores for one explained node, aligned to the original
// graph's edge ids (subgraph edges only). Weights are sigmoid outputs, always
// in (0,1).
struct EdgeMask {
  NodeId target = 0;
  std::vector<EdgeId> edge_ids;
  std::vector<double> weight;
};

// hops-hop neighborhood of center: edges traversed both ways for extraction,
// directions preserved in the induced subgraph. Local node/edge ids map back
// through `nodes` and `edge_ids`.
struct Neighborhood {
  DirectedGraph sub;
  std::vector<NodeId> nodes;     // local id -> original id
  std::vector<EdgeId> edge_ids;  // local edge id -> original edge id
  NodeId local_target = 0;
};

Neighborhood extract_neighborhood(const DirectedGraph& g, NodeId center, int hops);

// Class probabilities at the target inside its neighborhood, with an optional
// per-subgraph-edge mask (1.0 = keep). Used for fidelity checks.
std::vector<double> target_probs(const Neighborhood& nb, const Matrix& features,
                                 const ModelConfig& cfg, const ParamStore& params,
                                 const std::vector<double>* mask = nullptr);

// GNNExplainer-style edge-mask optimization against the frozen model: learns
// per-edge logits minimizing -log p(original predicted class at target)
// + sparsity_coeff * mean(mask) + entropy_coeff * mean(binary entropy).
EdgeMask explain_node(const DirectedGraph& g, const Matrix& features, const ModelConfig& cfg,
                      const ParamStore& params, NodeId target, const ExplainConfig& xcfg);

}  // namespace dgat
