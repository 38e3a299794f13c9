#include "dgat/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace dgat {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw CliError("config", "key '" + key + "': expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw CliError("config", "key '" + key + "': expected number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw CliError("config", "key '" + key + "': expected boolean, got '" + v + "'");
}

unsigned long long to_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    unsigned long long r = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw CliError("config", "key '" + key + "': expected unsigned integer, got '" + v + "'");
  }
}

}  // namespace

void RunConfig::set(const std::string& raw_key, const std::string& value) {
  std::string key = raw_key;
  // CLI aliases
  if (key == "model") key = "model.kind";
  else if (key == "epochs") key = "train.epochs";
  else if (key == "lr") key = "train.lr";

  try {
    if (key == "data") data_dir = value;
    else if (key == "out") out_dir = value;
    else if (key == "checkpoint") checkpoint_path = value;
    else if (key == "target") target = to_int(key, value);
    else if (key == "seed") {
      auto s = to_u64(key, value);
      seeds = {s};
      model.seed = s;
      train_cfg.seed = s;
      explain_cfg.seed = s;
      synth.seed = s;
    } else if (key == "seeds") {
      seeds.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) seeds.push_back(to_u64(key, trim(item)));
      if (seeds.empty()) throw CliError("config", "seeds list is empty");
    } else if (key == "model.kind") model.kind = layer_kind_from_name(value);
    else if (key == "model.layers") model.num_layers = to_int(key, value);
    else if (key == "model.hidden") model.hidden_dim = to_int(key, value);
    else if (key == "model.classes") model.num_classes = to_int(key, value);
    else if (key == "model.slope") model.leaky_slope = to_double(key, value);
    else if (key == "model.self_loops") model.self_loops = to_bool(key, value);
    else if (key == "model.bias") model.bias = to_bool(key, value);
    else if (key == "model.dedgat_same_role") model.dedgat_same_role = to_bool(key, value);
    else if (key == "train.lr") train_cfg.learning_rate = to_double(key, value);
    else if (key == "train.weight_decay") train_cfg.weight_decay = to_double(key, value);
    else if (key == "train.epochs") train_cfg.max_epochs = to_int(key, value);
    else if (key == "train.patience") train_cfg.patience = to_int(key, value);
    else if (key == "train.precision")
      train_cfg.precision = value == "single" ? Precision::kSingle : Precision::kDouble;
    else if (key == "explain.hops") explain_cfg.hops = to_int(key, value);
    else if (key == "explain.epochs") explain_cfg.epochs = to_int(key, value);
    else if (key == "explain.lr") explain_cfg.learning_rate = to_double(key, value);
    else if (key == "explain.sparsity") explain_cfg.sparsity_coeff = to_double(key, value);
    else if (key == "explain.entropy") explain_cfg.entropy_coeff = to_double(key, value);
    else if (key == "synth.nodes") synth.num_nodes = to_int(key, value);
    else if (key == "synth.avg_out_degree") synth.avg_out_degree = to_double(key, value);
    else if (key == "synth.dim") synth.feature_dim = to_int(key, value);
    else if (key == "synth.signal") synth.signal = signal_direction_from_name(value);
    else if (key == "synth.noise_std") synth.noise_std = to_double(key, value);
    else if (key == "synth.positive_rate") synth.positive_rate = to_double(key, value);
    else if (key == "synth.reciprocal_rate") synth.reciprocal_rate = to_double(key, value);
    else if (key == "bias.threshold") bias_threshold = to_double(key, value);
    else if (key == "bias.centers") bias_centers = to_int(key, value);
    else throw CliError("config", "unknown configuration key '" + raw_key + "'");
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError("config", "key '" + raw_key + "': " + e.what());
  }

  if (key == "synth.positive_rate" && (synth.positive_rate <= 0.0 || synth.positive_rate >= 1.0))
    throw CliError("config", "synth.positive_rate must lie in (0,1)");
}

std::string RunConfig::echo() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  };
  kv["data"] = data_dir;
  kv["out"] = out_dir;
  kv["checkpoint"] = checkpoint_path;
  kv["target"] = std::to_string(target);
  {
    std::string s;
    for (auto v : seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
    kv["seeds"] = s;
  }
  kv["model.kind"] = layer_kind_name(model.kind);
  kv["model.layers"] = std::to_string(model.num_layers);
  kv["model.hidden"] = std::to_string(model.hidden_dim);
  kv["model.classes"] = std::to_string(model.num_classes);
  kv["model.slope"] = num(model.leaky_slope);
  kv["model.self_loops"] = model.self_loops ? "1" : "0";
  kv["model.bias"] = model.bias ? "1" : "0";
  kv["model.dedgat_same_role"] = model.dedgat_same_role ? "1" : "0";
  kv["train.lr"] = num(train_cfg.learning_rate);
  kv["train.weight_decay"] = num(train_cfg.weight_decay);
  kv["train.epochs"] = std::to_string(train_cfg.max_epochs);
  kv["train.patience"] = std::to_string(train_cfg.patience);
  kv["train.precision"] = train_cfg.precision == Precision::kSingle ? "single" : "double";
  kv["explain.hops"] = std::to_string(explain_cfg.hops);
  kv["explain.epochs"] = std::to_string(explain_cfg.epochs);
  kv["explain.lr"] = num(explain_cfg.learning_rate);
  kv["explain.sparsity"] = num(explain_cfg.sparsity_coeff);
  kv["explain.entropy"] = num(explain_cfg.entropy_coeff);
  kv["synth.nodes"] = std::to_string(synth.num_nodes);
  kv["synth.avg_out_degree"] = num(synth.avg_out_degree);
  kv["synth.dim"] = std::to_string(synth.feature_dim);
  kv["synth.signal"] = signal_direction_name(synth.signal);
  kv["synth.noise_std"] = num(synth.noise_std);
  kv["synth.positive_rate"] = num(synth.positive_rate);
  kv["synth.reciprocal_rate"] = num(synth.reciprocal_rate);
  kv["bias.threshold"] = num(bias_threshold);
  kv["bias.centers"] = std::to_string(bias_centers);

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("io", "cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliError("config", path + ":" + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

RunConfig parse_run_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  if (const char* env = std::getenv("DGAT_THREADS")) {
    cfg.threads = std::max(1, to_int("DGAT_THREADS", env));
  }
  // config file first, remaining flags override in order
  for (size_t i = 0; i + 1 < args.size(); i += 2)
    if (args[i] == "--config") load_config_file(cfg, args[i + 1]);
  for (size_t i = 0; i < args.size(); i += 2) {
    const std::string& key = args[i];
    if (key.size() < 3 || key.substr(0, 2) != "--")
      throw CliError("usage", "expected --key value pairs, got '" + key + "'");
    if (i + 1 >= args.size()) throw CliError("usage", "missing value for '" + key + "'");
    if (key == "--config") continue;
    cfg.set(key.substr(2), args[i + 1]);
  }
  return cfg;
}

}  // namespace dgat
