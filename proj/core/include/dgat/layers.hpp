#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dgat/graph.hpp"
#include "dgat/param_store.hpp"
#include "dgat/tape.hpp"

namespace dgat {

enum class LayerKind { kGat, kDgat, kDedgat };

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct ModelConfig {
  LayerKind kind = LayerKind::kDedgat;
  int num_layers = 2;
  int hidden_dim = 16;
  int num_classes = 2;
  double leaky_slope = 0.2;
  bool self_loops = true;
  bool bias = false;
  // DEDGAT aggregation variant: messages carry the opposite-role embedding
  // by default (t aggregates s_j, s aggregates t_j); same_role flips that.
  bool dedgat_same_role = false;
  unsigned long long seed = 0;
};

// Edge index lists for one prepared graph (self loops already added when the
// model wants them). The in branch covers every edge; the out branch skips
// self loops so a loop edge is only counted once, on the in side.
struct LayerTopology {
  int num_nodes = 0;
  int num_edges = 0;
  std::vector<int> in_src, in_dst;
  std::vector<EdgeId> in_edge;
  std::vector<int> out_src, out_dst;
  std::vector<EdgeId> out_edge;
};

LayerTopology build_topology(const DirectedGraph& g_prepared);

struct GatLayerRefs {
  Tensor W, a;
  std::optional<Tensor> bW;
};
struct DgatLayerRefs {
  Tensor W, U, a_t, a_s;
  std::optional<Tensor> bW, bU;
};
struct DedgatLayerRefs {
  Tensor w, u, a_t, a_s;
  std::optional<Tensor> bw, bu;
};

struct DualState {
  Tensor t;
  Tensor s;
};

// One layer of each kind. edge_mask, when given, is an E x 1 tensor aligned
// to the prepared graph's edge ids and multiplies the softmaxed attention
// weights per edge.
Tensor gat_forward(Tape& tape, const LayerTopology& topo, Tensor h, const GatLayerRefs& p,
                   double slope, const Tensor* edge_mask = nullptr);
Tensor dgat_forward(Tape& tape, const LayerTopology& topo, Tensor h, const DgatLayerRefs& p,
                    double slope, const Tensor* edge_mask = nullptr);
DualState dedgat_forward(Tape& tape, const LayerTopology& topo, DualState state,
                         const DedgatLayerRefs& p, double slope,
                         const Tensor* edge_mask = nullptr, bool same_role = false);

// h^(L) = t^(L) + s^(L)
Tensor finalize_dual(Tape& tape, DualState state);

// Row-wise class probabilities softmax(h V).
Tensor classify(Tape& tape, Tensor h, Tensor v_head);

// Full model: layers, inter-layer leaky_relu (not after the last layer), and
// the linear head. Parameters are pulled from the store by name
// ("layer<i>.W", ..., "head.V"); init_params creates the matching set.
Tensor model_logits(Tape& tape, const LayerTopology& topo, Tensor features,
                    const ModelConfig& cfg, ParamStore& params,
                    const Tensor* edge_mask = nullptr);

ParamStore init_params(const ModelConfig& cfg, int d_in, unsigned long long seed);

// Exact parameter count for the configured model, head included by default.
long long count_parameters(const ModelConfig& cfg, int d_in, bool include_head = true);

}  // namespace dgat
