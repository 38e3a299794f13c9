#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dgat {

using NodeId = int;
using EdgeId = int;

struct Edge {
  NodeId src;
  NodeId dst;
};

// Immutable sparse directed graph. Edge ids are assigned by input order and
// never reordered; the in-index holds a permutation of the same ids, so an
// edge has a single identity regardless of traversal direction.
class DirectedGraph {
 public:
  static DirectedGraph build(int num_nodes, const std::vector<Edge>& edge_pairs);

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  Edge edge(EdgeId e) const { return edges_[e]; }

  // Neighbors paired with the id of the connecting edge.
  // in_neighbors(i):  all j with edge (j -> i).
  // out_neighbors(i): all j with edge (i -> j).
  std::vector<std::pair<NodeId, EdgeId>> in_neighbors(NodeId i) const;
  std::vector<std::pair<NodeId, EdgeId>> out_neighbors(NodeId i) const;

  // Edge-id ranges, avoiding pair allocation on hot paths.
  const std::vector<EdgeId>& out_edge_ids(NodeId i, int& begin, int& end) const;
  const std::vector<EdgeId>& in_edge_ids(NodeId i, int& begin, int& end) const;

  bool has_edge(NodeId src, NodeId dst) const;

  // Appends (i -> i) for every node lacking one; existing edge ids unchanged.
  DirectedGraph with_self_loops() const;

  // Graph with every edge (s -> d) replaced by (d -> s); edge ids preserved.
  DirectedGraph reversed() const;

  // All ordered pairs (i, j) such that both (i -> j) and (j -> i) exist.
  std::vector<std::pair<NodeId, NodeId>> mutual_edge_pairs() const;

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  // CSR over edge ids sorted by src (out) and by dst (in).
  std::vector<int> out_offsets_, in_offsets_;
  std::vector<EdgeId> out_edge_ids_, in_edge_ids_;
};

struct HopDistances {
  NodeId source = 0;
  // nullopt marks an unreachable node.
  std::vector<std::optional<int>> dist;
};

// BFS hop counts from source; with treat_as_undirected each edge is
// traversable in both directions.
HopDistances hop_distance(const DirectedGraph& g, NodeId source, bool treat_as_undirected);

}  // namespace dgat
