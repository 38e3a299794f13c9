#include "dgat/bias.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dgat {

BiasReport classify_edges_by_direction(const DirectedGraph& g, const EdgeMask& mask,
                                       NodeId center) {
  if (mask.edge_ids.size() != mask.weight.size())
    throw std::invalid_argument("classify_edges_by_direction: mask ids/weights misaligned");
  BiasReport report;
  report.center = center;
  HopDistances k = hop_distance(g, center, /*treat_as_undirected=*/true);
  for (size_t m = 0; m < mask.edge_ids.size(); ++m) {
    Edge e = g.edge(mask.edge_ids[m]);
    double w = mask.weight[m];
    if (!g.has_edge(e.dst, e.src)) {
      ++report.excluded_nonmutual;
      continue;
    }
    auto ki = k.dist[e.src];
    auto kj = k.dist[e.dst];
    if (!ki || !kj) {
      ++report.excluded_unreachable;
      continue;
    }
    if (*ki > *kj) report.s_in.emplace_back(mask.edge_ids[m], w);
    else if (*ki < *kj) report.s_out.emplace_back(mask.edge_ids[m], w);
    else ++report.excluded_same_shell;
  }
  return report;
}

void bias_proportions(BiasReport& report, double threshold) {
  report.threshold = threshold;
  report.count_in_above = 0;
  report.count_out_above = 0;
  for (auto& [e, w] : report.s_in)
    if (w > threshold) ++report.count_in_above;
  for (auto& [e, w] : report.s_out)
    if (w > threshold) ++report.count_out_above;
  report.proportion_in.reset();
  report.proportion_out.reset();
  report.ratio.reset();
  if (!report.s_in.empty())
    report.proportion_in = static_cast<double>(report.count_in_above) / report.s_in.size();
  if (!report.s_out.empty())
    report.proportion_out = static_cast<double>(report.count_out_above) / report.s_out.size();
  if (report.proportion_in && report.proportion_out && *report.proportion_out > 0.0)
    report.ratio = *report.proportion_in / *report.proportion_out;
}

namespace {

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

BiasSummary aggregate_bias(const DirectedGraph& g, const Matrix& features,
                           const ModelConfig& cfg, const ParamStore& params,
                           const std::vector<NodeId>& centers, const ExplainConfig& xcfg,
                           double threshold) {
  if (centers.empty()) throw std::invalid_argument("aggregate_bias: empty center list");
  BiasSummary summary;
  summary.threshold = threshold;
  for (size_t c = 0; c < centers.size(); ++c) {
    ExplainConfig per = xcfg;
    per.seed = xcfg.seed + c;
    EdgeMask mask = explain_node(g, features, cfg, params, centers[c], per);
    BiasReport report = classify_edges_by_direction(g, mask, centers[c]);
    for (auto& [e, w] : report.s_in) summary.in_weights.push_back(w);
    for (auto& [e, w] : report.s_out) summary.out_weights.push_back(w);
    summary.excluded += report.excluded_nonmutual + report.excluded_same_shell +
                        report.excluded_unreachable;
    ++summary.explained_centers;
  }

  summary.mean_in = mean_of(summary.in_weights);
  summary.mean_out = mean_of(summary.out_weights);
  summary.median_in = median(summary.in_weights);
  summary.median_out = median(summary.out_weights);
  auto prop_above = [&](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    long long c = std::count_if(v.begin(), v.end(), [&](double w) { return w > threshold; });
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  summary.proportion_in = prop_above(summary.in_weights);
  summary.proportion_out = prop_above(summary.out_weights);
  if (summary.proportion_in && summary.proportion_out && *summary.proportion_out > 0.0)
    summary.ratio = *summary.proportion_in / *summary.proportion_out;

  summary.histogram.clear();
  for (int b = 0; b < 10; ++b) {
    BiasSummary::Bin bin{b / 10.0, (b + 1) / 10.0, 0, 0};
    auto in_bin = [&](double w) { return w >= bin.lo && (w < bin.hi || (b == 9 && w <= 1.0)); };
    for (double w : summary.in_weights) bin.count_in += in_bin(w);
    for (double w : summary.out_weights) bin.count_out += in_bin(w);
    summary.histogram.push_back(bin);
  }
  return summary;
}

void write_mask_table(std::ostream& out, const DirectedGraph& g, const EdgeMask& mask,
                      const BiasReport& report) {
  auto set_of = [&](EdgeId e) -> const char* {
    for (auto& [id, w] : report.s_in)
      if (id == e) return "in";
    for (auto& [id, w] : report.s_out)
      if (id == e) return "out";
    return "excluded";
  };
  out << "edge_id,src,dst,weight,set\n";
  char buf[64];
  for (size_t m = 0; m < mask.edge_ids.size(); ++m) {
    Edge e = g.edge(mask.edge_ids[m]);
    std::snprintf(buf, sizeof(buf), "%.17g", mask.weight[m]);
    out << mask.edge_ids[m] << ',' << e.src << ',' << e.dst << ',' << buf << ','
        << set_of(mask.edge_ids[m]) << '\n';
  }
}

EdgeMask read_mask_table(std::istream& in, NodeId target) {
  EdgeMask mask;
  mask.target = target;
  std::string line;
  if (!std::getline(in, line) || line != "edge_id,src,dst,weight,set")
    throw std::runtime_error("mask table: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw std::runtime_error("mask table: malformed row: " + line);
    mask.edge_ids.push_back(std::stoi(fields[0]));
    mask.weight.push_back(std::stod(fields[3]));
  }
  return mask;
}

void write_histogram(std::ostream& out, const BiasSummary& summary) {
  out << "bin_lo,bin_hi,count_in,count_out\n";
  for (const auto& bin : summary.histogram)
    out << bin.lo << ',' << bin.hi << ',' << bin.count_in << ',' << bin.count_out << '\n';
}

}  // namespace dgat
