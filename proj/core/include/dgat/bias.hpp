#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "dgat/explain.hpp"
#include "dgat/graph.hpp"

namespace dgat {

// S_in / S_out memberships for one explained center, plus the thresholded
// proportion statistics. Only edges whose reverse also exists participate;
// same-shell and unreachable edges are excluded and counted separately.
struct BiasReport {
  NodeId center = 0;
  std::vector<std::pair<EdgeId, double>> s_in, s_out;
  int excluded_nonmutual = 0;
  int excluded_same_shell = 0;
  int excluded_unreachable = 0;
  double threshold = 0.5;
  int count_in_above = 0;
  int count_out_above = 0;
  std::optional<double> proportion_in, proportion_out, ratio;
};

// Memberships only: an edge (i -> j) with weight w lands in s_in when
// k(i) > k(j) and in s_out when k(i) < k(j), with k the undirected hop
// distance to the center.
BiasReport classify_edges_by_direction(const DirectedGraph& g, const EdgeMask& mask,
                                       NodeId center);

// Completes the report: proportion of each set above the threshold and their
// ratio. Empty sets leave the corresponding fields unset.
void bias_proportions(BiasReport& report, double threshold);

struct BiasSummary {
  std::vector<double> in_weights, out_weights;
  long long explained_centers = 0;
  long long excluded = 0;
  double threshold = 0.5;
  std::optional<double> mean_in, mean_out, median_in, median_out;
  std::optional<double> proportion_in, proportion_out, ratio;
  struct Bin {
    double lo, hi;
    long long count_in, count_out;
  };
  std::vector<Bin> histogram;  // 10 bins over [0,1]
};

// Runs explain_node per center (explainer seed offset by the center index),
// classifies each mask, and pools the weights into the two empirical
// distributions.
BiasSummary aggregate_bias(const DirectedGraph& g, const Matrix& features,
                           const ModelConfig& cfg, const ParamStore& params,
                           const std::vector<NodeId>& centers, const ExplainConfig& xcfg,
                           double threshold);

// `edge_id, src, dst, weight, set` rows; set is one of in/out/excluded.
void write_mask_table(std::ostream& out, const DirectedGraph& g, const EdgeMask& mask,
                      const BiasReport& report);
// Parses the table back (weights round-trip losslessly).
EdgeMask read_mask_table(std::istream& in, NodeId target);

// `bin_lo, bin_hi, count_in, count_out` rows.
void write_histogram(std::ostream& out, const BiasSummary& summary);

}  // namespace dgat
