#include "dgat/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace dgat {

namespace {

int64_t pair_key(NodeId s, NodeId d) {
  return (static_cast<int64_t>(s) << 32) | static_cast<uint32_t>(d);
}

}  // namespace

DirectedGraph DirectedGraph::build(int num_nodes, const std::vector<Edge>& edge_pairs) {
  if (num_nodes < 0) throw std::invalid_argument("num_nodes must be non-negative");
  DirectedGraph g;
  g.num_nodes_ = num_nodes;
  g.edges_ = edge_pairs;

  std::unordered_set<int64_t> seen;
  seen.reserve(edge_pairs.size() * 2);
  for (const Edge& e : edge_pairs) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
      throw std::invalid_argument("edge (" + std::to_string(e.src) + "," +
                                  std::to_string(e.dst) + ") out of range for " +
                                  std::to_string(num_nodes) + " nodes");
    if (!seen.insert(pair_key(e.src, e.dst)).second)
      throw std::invalid_argument("duplicate edge (" + std::to_string(e.src) + "," +
                                  std::to_string(e.dst) + ")");
  }

  const int m = static_cast<int>(edge_pairs.size());
  auto build_csr = [&](bool by_src, std::vector<int>& offsets, std::vector<EdgeId>& ids) {
    offsets.assign(num_nodes + 1, 0);
    for (const Edge& e : g.edges_) ++offsets[(by_src ? e.src : e.dst) + 1];
    for (int i = 1; i <= num_nodes; ++i) offsets[i] += offsets[i - 1];
    ids.resize(m);
    std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
    // Stable by edge id: neighbor lists come out in input order.
    for (EdgeId e = 0; e < m; ++e) {
      NodeId key = by_src ? g.edges_[e].src : g.edges_[e].dst;
      ids[cursor[key]++] = e;
    }
  };
  build_csr(true, g.out_offsets_, g.out_edge_ids_);
  build_csr(false, g.in_offsets_, g.in_edge_ids_);
  return g;
}

std::vector<std::pair<NodeId, EdgeId>> DirectedGraph::in_neighbors(NodeId i) const {
  std::vector<std::pair<NodeId, EdgeId>> out;
  for (int k = in_offsets_[i]; k < in_offsets_[i + 1]; ++k) {
    EdgeId e = in_edge_ids_[k];
    out.emplace_back(edges_[e].src, e);
  }
  return out;
}

std::vector<std::pair<NodeId, EdgeId>> DirectedGraph::out_neighbors(NodeId i) const {
  std::vector<std::pair<NodeId, EdgeId>> out;
  for (int k = out_offsets_[i]; k < out_offsets_[i + 1]; ++k) {
    EdgeId e = out_edge_ids_[k];
    out.emplace_back(edges_[e].dst, e);
  }
  return out;
}

const std::vector<EdgeId>& DirectedGraph::out_edge_ids(NodeId i, int& begin, int& end) const {
  begin = out_offsets_[i];
  end = out_offsets_[i + 1];
  return out_edge_ids_;
}

const std::vector<EdgeId>& DirectedGraph::in_edge_ids(NodeId i, int& begin, int& end) const {
  begin = in_offsets_[i];
  end = in_offsets_[i + 1];
  return in_edge_ids_;
}

bool DirectedGraph::has_edge(NodeId src, NodeId dst) const {
  for (int k = out_offsets_[src]; k < out_offsets_[src + 1]; ++k)
    if (edges_[out_edge_ids_[k]].dst == dst) return true;
  return false;
}

DirectedGraph DirectedGraph::with_self_loops() const {
  std::vector<Edge> edges = edges_;
  std::vector<bool> has_loop(num_nodes_, false);
  for (const Edge& e : edges_)
    if (e.src == e.dst) has_loop[e.src] = true;
  for (NodeId i = 0; i < num_nodes_; ++i)
    if (!has_loop[i]) edges.push_back({i, i});
  return build(num_nodes_, edges);
}

DirectedGraph DirectedGraph::reversed() const {
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const Edge& e : edges_) edges.push_back({e.dst, e.src});
  return build(num_nodes_, edges);
}

std::vector<std::pair<NodeId, NodeId>> DirectedGraph::mutual_edge_pairs() const {
  std::unordered_set<int64_t> present;
  present.reserve(edges_.size() * 2);
  for (const Edge& e : edges_) present.insert(pair_key(e.src, e.dst));
  std::vector<std::pair<NodeId, NodeId>> out;
  for (const Edge& e : edges_) {
    if (e.src == e.dst) continue;
    if (present.count(pair_key(e.dst, e.src))) out.emplace_back(e.src, e.dst);
  }
  return out;
}

HopDistances hop_distance(const DirectedGraph& g, NodeId source, bool treat_as_undirected) {
  if (source < 0 || source >= g.num_nodes())
    throw std::invalid_argument("hop_distance: source out of range");
  HopDistances h;
  h.source = source;
  h.dist.assign(g.num_nodes(), std::nullopt);
  h.dist[source] = 0;
  std::deque<NodeId> queue{source};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    int d = *h.dist[u];
    auto visit = [&](NodeId v) {
      if (!h.dist[v]) {
        h.dist[v] = d + 1;
        queue.push_back(v);
      }
    };
    for (auto [v, e] : g.out_neighbors(u)) visit(v);
    if (treat_as_undirected)
      for (auto [v, e] : g.in_neighbors(u)) visit(v);
  }
  return h;
}

}  // namespace dgat
