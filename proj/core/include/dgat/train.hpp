#pragma once

#include <vector>

#include "dgat/graph.hpp"
#include "dgat/layers.hpp"
#include "dgat/matrix.hpp"
#include "dgat/param_store.hpp"

namespace dgat {

enum class Precision { kSingle, kDouble };

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  int max_epochs = 300;
  int patience = 30;
  // Empty means inverse class frequency computed on the train split.
  std::vector<double> class_weights;
  unsigned long long seed = 0;
  Precision precision = Precision::kDouble;
};

// Disjoint node-id sets over labeled nodes.
struct Split {
  std::vector<int> train, val, test;
};

struct EvalReport {
  int epoch = 0;
  double loss = 0.0;
  double auc = 0.0;
};

struct TrainResult {
  ParamStore params;  // restored from the best validation epoch
  std::vector<EvalReport> history;
  int best_epoch = 0;
  double best_val_auc = 0.0;
  double test_auc = 0.0;
};

// Adam with beta1=0.9, beta2=0.999, eps=1e-8, bias correction, and decoupled
// weight decay applied as theta -= lr*wd*theta before the moment update.
// t is the 1-based step count.
void adam_step(ParamStore& params, const TrainConfig& cfg, int t);

// Full-batch training of the configured model, minimizing class-weighted
// cross entropy on the train split; selects the epoch with the best
// validation AUC and stops after `patience` epochs without improvement.
// labels[i] in {0,1}, or -1 for unlabeled nodes (excluded from loss).
TrainResult train(const DirectedGraph& g, const Matrix& features,
                  const std::vector<int>& labels, const Split& split,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg);

// Class-1 scores (binary head) for every node under the given parameters.
std::vector<double> node_scores(const LayerTopology& topo, const Matrix& features,
                                const ModelConfig& cfg, ParamStore& params);

}  // namespace dgat
