#include "dgat/layers.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dgat {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kGat: return "gat";
    case LayerKind::kDgat: return "dgat";
    case LayerKind::kDedgat: return "dedgat";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "gat") return LayerKind::kGat;
  if (name == "dgat") return LayerKind::kDgat;
  if (name == "dedgat") return LayerKind::kDedgat;
  throw std::invalid_argument("unknown layer kind: " + name + " (expected gat|dgat|dedgat)");
}

LayerTopology build_topology(const DirectedGraph& g) {
  LayerTopology topo;
  topo.num_nodes = g.num_nodes();
  topo.num_edges = g.num_edges();
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    Edge ed = g.edge(e);
    topo.in_src.push_back(ed.src);
    topo.in_dst.push_back(ed.dst);
    topo.in_edge.push_back(e);
    if (ed.src != ed.dst) {
      topo.out_src.push_back(ed.src);
      topo.out_dst.push_back(ed.dst);
      topo.out_edge.push_back(e);
    }
  }
  return topo;
}

namespace {

// One attention branch. Per edge e = (idx_i[e], idx_j[e]) the score is
// leaky_relu(a^T [score_i[idx_i] || score_j[idx_j]]), softmaxed within the
// segment idx_i, then aggregates gather(msg, idx_j) into row idx_i.
Tensor attention_branch(Tape& tape, Tensor score_i, Tensor score_j, Tensor msg, Tensor a,
                        double slope, const std::vector<int>& idx_i,
                        const std::vector<int>& idx_j, int num_nodes,
                        const Tensor* edge_mask, const std::vector<EdgeId>& edge_ids) {
  if (idx_i.empty()) return tape.constant(Matrix::zeros(num_nodes, msg.cols));
  Tensor hi = tape.gather_rows(score_i, idx_i);
  Tensor hj = tape.gather_rows(score_j, idx_j);
  Tensor scores = tape.leaky_relu(tape.matmul(tape.concat_cols(hi, hj), a), slope);
  Tensor att = tape.segment_softmax(scores, idx_i, num_nodes);
  if (edge_mask) {
    std::vector<int> mask_idx(edge_ids.begin(), edge_ids.end());
    att = tape.mul(att, tape.gather_rows(*edge_mask, mask_idx));
  }
  Tensor messages = tape.gather_rows(msg, idx_j);
  return tape.segment_weighted_sum(att, messages, idx_i, num_nodes);
}

Tensor linear(Tape& tape, Tensor h, Tensor w, const std::optional<Tensor>& b) {
  Tensor out = tape.matmul(h, w);
  if (b) out = tape.add_rowvec(out, *b);
  return out;
}

}  // namespace

Tensor gat_forward(Tape& tape, const LayerTopology& topo, Tensor h, const GatLayerRefs& p,
                   double slope, const Tensor* edge_mask) {
  Tensor wh = linear(tape, h, p.W, p.bW);
  return attention_branch(tape, wh, wh, wh, p.a, slope, topo.in_dst, topo.in_src,
                          topo.num_nodes, edge_mask, topo.in_edge);
}

Tensor dgat_forward(Tape& tape, const LayerTopology& topo, Tensor h, const DgatLayerRefs& p,
                    double slope, const Tensor* edge_mask) {
  Tensor wh = linear(tape, h, p.W, p.bW);
  Tensor uh = linear(tape, h, p.U, p.bU);
  Tensor in_branch = attention_branch(tape, wh, wh, wh, p.a_t, slope, topo.in_dst, topo.in_src,
                                      topo.num_nodes, edge_mask, topo.in_edge);
  Tensor out_branch = attention_branch(tape, uh, uh, uh, p.a_s, slope, topo.out_src,
                                       topo.out_dst, topo.num_nodes, edge_mask, topo.out_edge);
  return tape.add(in_branch, out_branch);
}

DualState dedgat_forward(Tape& tape, const LayerTopology& topo, DualState state,
                         const DedgatLayerRefs& p, double slope, const Tensor* edge_mask,
                         bool same_role) {
  Tensor t_hat = linear(tape, state.t, p.w, p.bw);
  Tensor s_hat = linear(tape, state.s, p.u, p.bu);
  Tensor in_msg = same_role ? t_hat : s_hat;
  Tensor out_msg = same_role ? s_hat : t_hat;
  DualState next;
  next.t = attention_branch(tape, t_hat, s_hat, in_msg, p.a_t, slope, topo.in_dst, topo.in_src,
                            topo.num_nodes, edge_mask, topo.in_edge);
  next.s = attention_branch(tape, s_hat, t_hat, out_msg, p.a_s, slope, topo.out_src,
                            topo.out_dst, topo.num_nodes, edge_mask, topo.out_edge);
  return next;
}

Tensor finalize_dual(Tape& tape, DualState state) { return tape.add(state.t, state.s); }

Tensor classify(Tape& tape, Tensor h, Tensor v_head) {
  return tape.row_softmax(tape.matmul(h, v_head));
}

namespace {

std::optional<Tensor> maybe_bias(Tape& tape, ParamStore& params, const std::string& name,
                                 bool bias) {
  if (!bias) return std::nullopt;
  return tape.param(params, name);
}

}  // namespace

Tensor model_logits(Tape& tape, const LayerTopology& topo, Tensor features,
                    const ModelConfig& cfg, ParamStore& params, const Tensor* edge_mask) {
  if (cfg.num_layers < 1) throw std::invalid_argument("num_layers must be >= 1");
  Tensor h = features;
  DualState dual{features, features};  // t^(0) = s^(0) = input features
  for (int l = 0; l < cfg.num_layers; ++l) {
    std::string pre = "layer" + std::to_string(l) + ".";
    switch (cfg.kind) {
      case LayerKind::kGat: {
        GatLayerRefs refs{tape.param(params, pre + "W"), tape.param(params, pre + "a"),
                          maybe_bias(tape, params, pre + "bW", cfg.bias)};
        h = gat_forward(tape, topo, h, refs, cfg.leaky_slope, edge_mask);
        break;
      }
      case LayerKind::kDgat: {
        DgatLayerRefs refs{tape.param(params, pre + "W"), tape.param(params, pre + "U"),
                           tape.param(params, pre + "a_t"), tape.param(params, pre + "a_s"),
                           maybe_bias(tape, params, pre + "bW", cfg.bias),
                           maybe_bias(tape, params, pre + "bU", cfg.bias)};
        h = dgat_forward(tape, topo, h, refs, cfg.leaky_slope, edge_mask);
        break;
      }
      case LayerKind::kDedgat: {
        DedgatLayerRefs refs{tape.param(params, pre + "w"), tape.param(params, pre + "u"),
                             tape.param(params, pre + "a_t"), tape.param(params, pre + "a_s"),
                             maybe_bias(tape, params, pre + "bw", cfg.bias),
                             maybe_bias(tape, params, pre + "bu", cfg.bias)};
        dual = dedgat_forward(tape, topo, dual, refs, cfg.leaky_slope, edge_mask,
                              cfg.dedgat_same_role);
        break;
      }
    }
    if (l + 1 < cfg.num_layers) {
      if (cfg.kind == LayerKind::kDedgat) {
        dual.t = tape.leaky_relu(dual.t, cfg.leaky_slope);
        dual.s = tape.leaky_relu(dual.s, cfg.leaky_slope);
      } else {
        h = tape.leaky_relu(h, cfg.leaky_slope);
      }
    }
  }
  if (cfg.kind == LayerKind::kDedgat) h = finalize_dual(tape, dual);
  Tensor logits = tape.matmul(h, tape.param(params, "head.V"));
  if (cfg.bias) logits = tape.add_rowvec(logits, tape.param(params, "head.bV"));
  return logits;
}

namespace {

Matrix glorot(std::mt19937_64& rng, int rows, int cols, int fan_in, int fan_out) {
  double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.data) v = dist(rng);
  return m;
}

}  // namespace

ParamStore init_params(const ModelConfig& cfg, int d_in, unsigned long long seed) {
  ParamStore store;
  std::mt19937_64 rng(seed);
  int d = d_in;
  for (int l = 0; l < cfg.num_layers; ++l) {
    std::string pre = "layer" + std::to_string(l) + ".";
    int out = cfg.hidden_dim;
    switch (cfg.kind) {
      case LayerKind::kGat:
        store.insert(pre + "W", glorot(rng, d, out, d, out));
        store.insert(pre + "a", glorot(rng, 2 * out, 1, 2 * out, 1));
        if (cfg.bias) store.insert(pre + "bW", Matrix::zeros(1, out));
        break;
      case LayerKind::kDgat:
        store.insert(pre + "W", glorot(rng, d, out, d, out));
        store.insert(pre + "U", glorot(rng, d, out, d, out));
        store.insert(pre + "a_t", glorot(rng, 2 * out, 1, 2 * out, 1));
        store.insert(pre + "a_s", glorot(rng, 2 * out, 1, 2 * out, 1));
        if (cfg.bias) {
          store.insert(pre + "bW", Matrix::zeros(1, out));
          store.insert(pre + "bU", Matrix::zeros(1, out));
        }
        break;
      case LayerKind::kDedgat:
        store.insert(pre + "w", glorot(rng, d, out, d, out));
        store.insert(pre + "u", glorot(rng, d, out, d, out));
        store.insert(pre + "a_t", glorot(rng, 2 * out, 1, 2 * out, 1));
        store.insert(pre + "a_s", glorot(rng, 2 * out, 1, 2 * out, 1));
        if (cfg.bias) {
          store.insert(pre + "bw", Matrix::zeros(1, out));
          store.insert(pre + "bu", Matrix::zeros(1, out));
        }
        break;
    }
    d = out;
  }
  store.insert("head.V", glorot(rng, d, cfg.num_classes, d, cfg.num_classes));
  if (cfg.bias) store.insert("head.bV", Matrix::zeros(1, cfg.num_classes));
  return store;
}

long long count_parameters(const ModelConfig& cfg, int d_in, bool include_head) {
  long long total = 0;
  long long d = d_in;
  for (int l = 0; l < cfg.num_layers; ++l) {
    long long out = cfg.hidden_dim;
    switch (cfg.kind) {
      case LayerKind::kGat:
        total += d * out + 2 * out;
        if (cfg.bias) total += out;
        break;
      case LayerKind::kDgat:
      case LayerKind::kDedgat:
        total += 2 * d * out + 4 * out;
        if (cfg.bias) total += 2 * out;
        break;
    }
    d = out;
  }
  if (include_head) {
    total += d * cfg.num_classes;
    if (cfg.bias) total += cfg.num_classes;
  }
  return total;
}

}  // namespace dgat
