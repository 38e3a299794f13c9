#include "dgat/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "dgat/bias.hpp"
#include "dgat/checkpoint.hpp"
#include "dgat/dataset.hpp"
#include "dgat/metrics.hpp"

namespace dgat {

namespace fs = std::filesystem;

namespace {

fs::path require_out_dir(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw CliError("usage", "--out DIR is required");
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError("io", "cannot create output directory: " + dir.string());
  return dir;
}

void echo_config(const RunConfig& cfg, const fs::path& dir) {
  std::ofstream out(dir / "config.txt");
  out << cfg.echo();
  if (!out) throw CliError("io", "cannot write " + (dir / "config.txt").string());
}

// Wall-clock timestamps live only here, outside the reproducible outputs.
void sidecar_log(const fs::path& dir, const std::string& message) {
  std::ofstream log(dir / "run.log", std::ios::app);
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  log << now << " " << message << "\n";
}

DatasetBundle load_data(const RunConfig& cfg) {
  if (cfg.data_dir.empty()) throw CliError("usage", "--data DIR is required");
  try {
    return load_dataset(cfg.data_dir);
  } catch (const std::exception& e) {
    throw CliError("data", e.what());
  }
}

Checkpoint load_ckpt(const RunConfig& cfg) {
  if (cfg.checkpoint_path.empty()) throw CliError("usage", "--checkpoint PATH is required");
  try {
    return load_checkpoint(cfg.checkpoint_path);
  } catch (const std::exception& e) {
    throw CliError("data", e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_dims(const Checkpoint& ckpt, const DatasetBundle& data) {
  // first-layer projection row count must match the dataset feature width
  // (attention vectors and biases under layer0.* have other shapes)
  for (const auto& name : {"layer0.W", "layer0.U", "layer0.w", "layer0.u"}) {
    if (!ckpt.params.contains(name)) continue;
    const auto& entry = ckpt.params.at(name);
    {
      if (entry.value.rows != data.features.cols)
        throw CliError("data", "checkpoint expects " + std::to_string(entry.value.rows) +
                                   " input features but dataset has " +
                                   std::to_string(data.features.cols));
      return;
    }
  }
}

}  // namespace

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  fs::path dir = require_out_dir(cfg);
  GeneratorReport report;
  DatasetBundle bundle;
  try {
    bundle = generate_synthetic(cfg.synth, report);
  } catch (const std::exception& e) {
    throw CliError("config", e.what());
  }
  save_dataset(bundle, dir);
  echo_config(cfg, dir);
  {
    std::ofstream rep(dir / "generator_report.txt");
    rep << "nodes = " << bundle.graph.num_nodes() << "\n";
    rep << "edges = " << bundle.graph.num_edges() << "\n";
    rep << "out_probe_auc = " << fmt(report.out_probe_auc) << "\n";
    rep << "in_probe_auc = " << fmt(report.in_probe_auc) << "\n";
  }
  sidecar_log(dir, "generate done");
  out << "generated " << bundle.graph.num_nodes() << " nodes, " << bundle.graph.num_edges()
      << " edges at " << dir.string() << "\n";
  out << "probe auc: out=" << report.out_probe_auc << " in=" << report.in_probe_auc << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  fs::path dir = require_out_dir(cfg);
  DatasetBundle data = load_data(cfg);
  echo_config(cfg, dir);
  const std::string kind = layer_kind_name(cfg.model.kind);

  std::vector<double> test_aucs;
  for (auto seed : cfg.seeds) {
    ModelConfig model_cfg = cfg.model;
    model_cfg.seed = seed;
    TrainConfig train_cfg = cfg.train_cfg;
    train_cfg.seed = seed;
    TrainResult result;
    try {
      result = train(data.graph, data.features, data.labels, data.split, model_cfg, train_cfg);
    } catch (const std::exception& e) {
      throw CliError("data", e.what());
    }

    std::string tag = "model_" + kind + "_seed" + std::to_string(seed);
    save_checkpoint(result.params, model_cfg, train_cfg.precision, dir / (tag + ".ckpt"));
    {
      std::ofstream metrics(dir / ("metrics_" + kind + "_seed" + std::to_string(seed) + ".tsv"));
      metrics << "epoch\ttrain_loss\tval_auc\n";
      for (const auto& rec : result.history)
        metrics << rec.epoch << '\t' << fmt(rec.loss) << '\t' << fmt(rec.auc) << '\n';
    }
    test_aucs.push_back(result.test_auc);
    out << kind << " seed " << seed << ": best epoch " << result.best_epoch << ", val auc "
        << result.best_val_auc << ", test auc " << result.test_auc << "\n";
  }

  double mean = 0.0;
  for (double a : test_aucs) mean += a;
  mean /= static_cast<double>(test_aucs.size());
  double var = 0.0;
  for (double a : test_aucs) var += (a - mean) * (a - mean);
  double stdev = test_aucs.size() > 1 ? std::sqrt(var / (test_aucs.size() - 1)) : 0.0;
  {
    std::ofstream summary(dir / ("summary_" + kind + ".tsv"));
    summary << "seed\ttest_auc\n";
    for (size_t i = 0; i < cfg.seeds.size(); ++i)
      summary << cfg.seeds[i] << '\t' << fmt(test_aucs[i]) << '\n';
    summary << "mean\t" << fmt(mean) << "\n";
    summary << "std\t" << fmt(stdev) << "\n";
  }
  sidecar_log(dir, "train done");
  out << kind << " test auc: " << mean << " +/- " << stdev << " over " << cfg.seeds.size()
      << " seeds\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
  DatasetBundle data = load_data(cfg);
  Checkpoint ckpt = load_ckpt(cfg);
  check_dims(ckpt, data);
  DirectedGraph prepared =
      ckpt.config.self_loops ? data.graph.with_self_loops() : data.graph;
  LayerTopology topo = build_topology(prepared);
  std::vector<double> scores = node_scores(topo, data.features, ckpt.config, ckpt.params);

  auto subset = [&](const std::vector<int>& ids) {
    std::vector<double> s;
    std::vector<int> y;
    for (int id : ids) {
      s.push_back(scores[id]);
      y.push_back(data.labels[id]);
    }
    return evaluate_auc(s, y);
  };
  double test_auc = subset(data.split.test);
  out << "test auc = " << test_auc << "\n";
  if (!cfg.out_dir.empty()) {
    fs::path dir = require_out_dir(cfg);
    std::ofstream ev(dir / "eval.tsv");
    ev << "split\tauc\n";
    ev << "test\t" << fmt(test_auc) << "\n";
    echo_config(cfg, dir);
  }
  return 0;
}

int cmd_explain(const RunConfig& cfg, std::ostream& out) {
  fs::path dir = require_out_dir(cfg);
  DatasetBundle data = load_data(cfg);
  Checkpoint ckpt = load_ckpt(cfg);
  check_dims(ckpt, data);
  if (cfg.target < 0 || cfg.target >= data.graph.num_nodes())
    throw CliError("usage", "--target NODE is required and must be a valid node id");

  EdgeMask mask =
      explain_node(data.graph, data.features, ckpt.config, ckpt.params, cfg.target, cfg.explain_cfg);
  BiasReport report = classify_edges_by_direction(data.graph, mask, cfg.target);
  bias_proportions(report, cfg.bias_threshold);

  fs::path table = dir / ("explain_" + std::to_string(cfg.target) + ".csv");
  {
    std::ofstream tf(table);
    write_mask_table(tf, data.graph, mask, report);
  }
  echo_config(cfg, dir);
  sidecar_log(dir, "explain done");
  out << "explained node " << cfg.target << ": " << mask.edge_ids.size() << " edges, |S_in|="
      << report.s_in.size() << " |S_out|=" << report.s_out.size() << " -> " << table.string()
      << "\n";
  return 0;
}

int cmd_bias_stats(const RunConfig& cfg, std::ostream& out) {
  fs::path dir = require_out_dir(cfg);
  DatasetBundle data = load_data(cfg);
  Checkpoint ckpt = load_ckpt(cfg);
  check_dims(ckpt, data);

  // central risk nodes: test-split positives, seeded sample capped for runtime
  std::vector<NodeId> centers;
  for (int id : data.split.test)
    if (data.labels[id] == 1) centers.push_back(id);
  if (centers.empty()) throw CliError("data", "no positive test nodes to use as centers");
  std::mt19937_64 rng(cfg.explain_cfg.seed);
  std::shuffle(centers.begin(), centers.end(), rng);
  if (static_cast<int>(centers.size()) > cfg.bias_centers) centers.resize(cfg.bias_centers);

  BiasSummary summary = aggregate_bias(data.graph, data.features, ckpt.config, ckpt.params,
                                       centers, cfg.explain_cfg, cfg.bias_threshold);

  auto opt = [&](const std::optional<double>& v) { return v ? fmt(*v) : "undefined"; };
  {
    std::ofstream sf(dir / "bias_summary.txt");
    sf << "center_policy = test-split positives, seeded sample\n";
    sf << "centers = " << summary.explained_centers << "\n";
    sf << "threshold = " << fmt(summary.threshold) << "\n";
    sf << "n_in = " << summary.in_weights.size() << "\n";
    sf << "n_out = " << summary.out_weights.size() << "\n";
    sf << "excluded = " << summary.excluded << "\n";
    sf << "mean_in = " << opt(summary.mean_in) << "\n";
    sf << "mean_out = " << opt(summary.mean_out) << "\n";
    sf << "median_in = " << opt(summary.median_in) << "\n";
    sf << "median_out = " << opt(summary.median_out) << "\n";
    sf << "proportion_in = " << opt(summary.proportion_in) << "\n";
    sf << "proportion_out = " << opt(summary.proportion_out) << "\n";
    sf << "ratio = " << opt(summary.ratio) << "\n";
  }
  {
    std::ofstream hf(dir / "bias_histogram.csv");
    write_histogram(hf, summary);
  }
  echo_config(cfg, dir);
  sidecar_log(dir, "bias-stats done");
  out << "bias stats over " << summary.explained_centers << " centers: proportion_in="
      << opt(summary.proportion_in) << " proportion_out=" << opt(summary.proportion_out)
      << " ratio=" << opt(summary.ratio) << "\n";
  return 0;
}

int cmd_param_count(const RunConfig& cfg, std::ostream& out) {
  int d_in = cfg.synth.feature_dim;
  if (!cfg.data_dir.empty()) d_in = load_data(cfg).features.cols;
  out << "model\tparameters\n";
  for (LayerKind kind : {LayerKind::kGat, LayerKind::kDgat, LayerKind::kDedgat}) {
    ModelConfig mc = cfg.model;
    mc.kind = kind;
    out << layer_kind_name(kind) << '\t' << count_parameters(mc, d_in) << '\n';
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty())
      throw CliError("usage",
                     "expected a subcommand: generate|train|eval|explain|bias-stats|param-count");
    std::vector<std::string> rest(args.begin() + 1, args.end());
    RunConfig cfg = parse_run_config(rest);
    const std::string& cmd = args[0];
    if (cmd == "generate") return cmd_generate(cfg, out);
    if (cmd == "train") return cmd_train(cfg, out);
    if (cmd == "eval") return cmd_eval(cfg, out);
    if (cmd == "explain") return cmd_explain(cfg, out);
    if (cmd == "bias-stats") return cmd_bias_stats(cfg, out);
    if (cmd == "param-count") return cmd_param_count(cfg, out);
    throw CliError("usage", "unknown subcommand '" + cmd + "'");
  } catch (const CliError& e) {
    err << "error: " << e.category << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dgat
