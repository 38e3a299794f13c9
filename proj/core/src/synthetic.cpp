#include "dgat/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "dgat/metrics.hpp"

namespace dgat {

const char* signal_direction_name(SignalDirection d) {
  switch (d) {
    case SignalDirection::kOut: return "out";
    case SignalDirection::kIn: return "in";
    case SignalDirection::kBoth: return "both";
  }
  return "?";
}

SignalDirection signal_direction_from_name(const std::string& name) {
  if (name == "out") return SignalDirection::kOut;
  if (name == "in") return SignalDirection::kIn;
  if (name == "both") return SignalDirection::kBoth;
  throw std::invalid_argument("unknown signal direction: " + name + " (expected out|in|both)");
}

namespace {

int64_t pair_key(int s, int d) {
  return (static_cast<int64_t>(s) << 32) | static_cast<uint32_t>(d);
}

// p . mean of feature rows in ids; nullopt stand-in: returns false.
bool probe_mean(const Matrix& x, const std::vector<double>& p, const std::vector<int>& ids,
                double& out) {
  if (ids.empty()) return false;
  double acc = 0.0;
  for (int id : ids)
    for (int j = 0; j < x.cols; ++j) acc += p[j] * x.at(id, j);
  out = acc / static_cast<double>(ids.size());
  return true;
}

}  // namespace

DatasetBundle generate_synthetic(const SyntheticConfig& cfg) {
  GeneratorReport report;
  return generate_synthetic(cfg, report);
}

DatasetBundle generate_synthetic(const SyntheticConfig& cfg, GeneratorReport& report) {
  if (cfg.num_nodes <= 0) throw std::invalid_argument("generate_synthetic: num_nodes must be > 0");
  if (cfg.avg_out_degree <= 0.0)
    throw std::invalid_argument("generate_synthetic: avg_out_degree must be > 0");
  if (cfg.positive_rate <= 0.0 || cfg.positive_rate >= 1.0)
    throw std::invalid_argument("generate_synthetic: positive_rate must lie in (0,1)");
  if (cfg.feature_dim <= 0)
    throw std::invalid_argument("generate_synthetic: feature_dim must be > 0");

  const int n = cfg.num_nodes;
  const int d = cfg.feature_dim;
  double recip = cfg.reciprocal_rate;
  if (recip < 0.0) recip = (cfg.signal == SignalDirection::kBoth) ? 1.0 : 0.0;

  std::mt19937_64 rng(cfg.seed);

  // graph
  std::vector<Edge> edges;
  std::unordered_set<int64_t> present;
  {
    std::poisson_distribution<int> deg_dist(cfg.avg_out_degree);
    std::uniform_int_distribution<int> target(0, n - 1);
    for (int i = 0; i < n; ++i) {
      int deg = std::min(deg_dist(rng), n - 1);
      for (int k = 0; k < deg; ++k) {
        int j = target(rng);
        if (j == i || present.count(pair_key(i, j))) continue;  // no self loops or duplicates
        present.insert(pair_key(i, j));
        edges.push_back({i, j});
      }
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    size_t base = edges.size();
    for (size_t e = 0; e < base; ++e) {
      if (recip <= 0.0) break;
      if (recip < 1.0 && coin(rng) >= recip) continue;
      int s = edges[e].dst, t = edges[e].src;
      if (!present.count(pair_key(s, t))) {
        present.insert(pair_key(s, t));
        edges.push_back({s, t});
      }
    }
  }

  DatasetBundle bundle;
  bundle.graph = DirectedGraph::build(n, edges);
  bundle.name = "synthetic";
  bundle.num_classes = 2;

  {
    std::normal_distribution<double> feat(0.0, 1.0);
    bundle.features = Matrix(n, d);
    for (double& v : bundle.features.data) v = feat(rng);
  }

  // fixed random unit probe
  report.probe.assign(d, 0.0);
  {
    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm = 0.0;
    for (double& v : report.probe) {
      v = gauss(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : report.probe) v /= norm;
  }

  // labels from the signal-side neighbor feature mean, thresholded at the
  // quantile matching positive_rate; noise makes the task imperfect
  std::vector<std::vector<int>> signal_ids(n);
  for (int i = 0; i < n; ++i) {
    if (cfg.signal == SignalDirection::kIn) {
      for (auto [j, e] : bundle.graph.in_neighbors(i)) signal_ids[i].push_back(j);
    } else {
      for (auto [j, e] : bundle.graph.out_neighbors(i)) signal_ids[i].push_back(j);
    }
  }
  std::vector<double> score(n);
  std::vector<bool> has_signal(n);
  {
    std::normal_distribution<double> noise(0.0, cfg.noise_std > 0 ? cfg.noise_std : 1e-300);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      has_signal[i] = probe_mean(bundle.features, report.probe, signal_ids[i], s);
      score[i] = s + (cfg.noise_std > 0 ? noise(rng) : 0.0);
    }
  }
  double threshold;
  {
    std::vector<double> finite;
    for (int i = 0; i < n; ++i)
      if (has_signal[i]) finite.push_back(score[i]);
    if (finite.empty()) throw std::invalid_argument("generate_synthetic: graph has no edges");
    size_t k = static_cast<size_t>((1.0 - cfg.positive_rate) * finite.size());
    k = std::min(k, finite.size() - 1);
    std::nth_element(finite.begin(), finite.begin() + k, finite.end());
    threshold = finite[k];
  }
  {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    bundle.labels.resize(n);
    for (int i = 0; i < n; ++i) {
      if (has_signal[i])
        bundle.labels[i] = score[i] > threshold ? 1 : 0;
      else
        bundle.labels[i] = coin(rng) < cfg.positive_rate ? 1 : 0;
    }
  }

  // stratified 60/20/20 split
  {
    std::vector<int> by_class[2];
    for (int i = 0; i < n; ++i) by_class[bundle.labels[i]].push_back(i);
    for (auto& ids : by_class) {
      std::shuffle(ids.begin(), ids.end(), rng);
      size_t n_train = static_cast<size_t>(0.6 * ids.size());
      size_t n_val = static_cast<size_t>(0.2 * ids.size());
      for (size_t k = 0; k < ids.size(); ++k) {
        if (k < n_train) bundle.split.train.push_back(ids[k]);
        else if (k < n_train + n_val) bundle.split.val.push_back(ids[k]);
        else bundle.split.test.push_back(ids[k]);
      }
    }
    std::sort(bundle.split.train.begin(), bundle.split.train.end());
    std::sort(bundle.split.val.begin(), bundle.split.val.end());
    std::sort(bundle.split.test.begin(), bundle.split.test.end());
  }

  // probe oracles over all nodes
  {
    std::vector<double> out_scores(n, 0.0), in_scores(n, 0.0);
    for (int i = 0; i < n; ++i) {
      std::vector<int> outs, ins{i};  // in-probe sees own + in-neighbor features
      for (auto [j, e] : bundle.graph.out_neighbors(i)) outs.push_back(j);
      for (auto [j, e] : bundle.graph.in_neighbors(i)) ins.push_back(j);
      probe_mean(bundle.features, report.probe, outs, out_scores[i]);
      probe_mean(bundle.features, report.probe, ins, in_scores[i]);
    }
    report.out_probe_auc = evaluate_auc(out_scores, bundle.labels);
    report.in_probe_auc = evaluate_auc(in_scores, bundle.labels);
  }
  return bundle;
}

}  // namespace dgat
