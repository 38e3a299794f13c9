#include "dgat/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dgat/metrics.hpp"
#include "dgat/tape.hpp"

namespace dgat {

void adam_step(ParamStore& params, const TrainConfig& cfg, int t) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (t < 1) throw std::invalid_argument("adam_step: step count is 1-based");
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (auto& [name, p] : params) {
    if (!p.grad.same_shape(p.value))
      throw std::runtime_error("adam_step: missing gradient for " + name);
    for (size_t i = 0; i < p.value.data.size(); ++i) {
      double& theta = p.value.data[i];
      theta -= cfg.learning_rate * cfg.weight_decay * theta;
      double g = p.grad.data[i];
      p.adam_m.data[i] = beta1 * p.adam_m.data[i] + (1.0 - beta1) * g;
      p.adam_v.data[i] = beta2 * p.adam_v.data[i] + (1.0 - beta2) * g * g;
      double m_hat = p.adam_m.data[i] / bc1;
      double v_hat = p.adam_v.data[i] / bc2;
      theta -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

std::vector<double> node_scores(const LayerTopology& topo, const Matrix& features,
                                const ModelConfig& cfg, ParamStore& params) {
  if (cfg.num_classes != 2)
    throw std::invalid_argument("node_scores: binary classification head required");
  Tape tape;
  Tensor logits = model_logits(tape, topo, tape.constant(features), cfg, params);
  const Matrix& lv = tape.value(logits);
  std::vector<double> scores(lv.rows);
  for (int i = 0; i < lv.rows; ++i) scores[i] = lv.at(i, 1) - lv.at(i, 0);
  return scores;
}

namespace {

std::vector<double> resolve_class_weights(const TrainConfig& cfg, const std::vector<int>& labels,
                                          const std::vector<int>& train_ids, int num_classes) {
  if (!cfg.class_weights.empty()) {
    if (static_cast<int>(cfg.class_weights.size()) != num_classes)
      throw std::invalid_argument("class_weights size must equal num_classes");
    return cfg.class_weights;
  }
  std::vector<long long> counts(num_classes, 0);
  for (int id : train_ids) ++counts[labels[id]];
  std::vector<double> w(num_classes, 1.0);
  for (int c = 0; c < num_classes; ++c)
    if (counts[c] > 0)
      w[c] = static_cast<double>(train_ids.size()) / (num_classes * static_cast<double>(counts[c]));
  return w;
}

double subset_auc(const std::vector<double>& scores, const std::vector<int>& labels,
                  const std::vector<int>& ids) {
  std::vector<double> s;
  std::vector<int> y;
  s.reserve(ids.size());
  y.reserve(ids.size());
  for (int id : ids) {
    s.push_back(scores[id]);
    y.push_back(labels[id]);
  }
  return evaluate_auc(s, y);
}

bool has_both_classes(const std::vector<int>& labels, const std::vector<int>& ids) {
  bool pos = false, neg = false;
  for (int id : ids) {
    if (labels[id] == 1) pos = true;
    else if (labels[id] == 0) neg = true;
  }
  return pos && neg;
}

}  // namespace

TrainResult train(const DirectedGraph& g, const Matrix& features,
                  const std::vector<int>& labels, const Split& split,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg) {
  if (split.train.empty()) throw std::invalid_argument("train: empty train split");
  if (static_cast<int>(labels.size()) != g.num_nodes())
    throw std::invalid_argument("train: one label entry per node required");
  for (int id : split.train)
    if (labels[id] < 0) throw std::invalid_argument("train: unlabeled node in train split");
  if (!has_both_classes(labels, split.train))
    throw std::invalid_argument("train: train split holds a single class; AUC is undefined");

  DirectedGraph prepared = model_cfg.self_loops ? g.with_self_loops() : g;
  LayerTopology topo = build_topology(prepared);

  std::vector<double> class_weights =
      resolve_class_weights(train_cfg, labels, split.train, model_cfg.num_classes);
  std::vector<int> train_labels;
  train_labels.reserve(split.train.size());
  for (int id : split.train) train_labels.push_back(labels[id]);

  TrainResult result;
  result.params = init_params(model_cfg, features.cols, model_cfg.seed);

  ParamStore best = result.params;
  double best_val = -1.0;
  int best_epoch = 0;
  int since_best = 0;
  const bool val_usable = !split.val.empty() && has_both_classes(labels, split.val);

  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    result.params.zero_grads();
    Tape tape;
    Tensor logits =
        model_logits(tape, topo, tape.constant(features), model_cfg, result.params);
    Tensor train_logits = tape.gather_rows(logits, split.train);
    Tensor loss = tape.softmax_cross_entropy(train_logits, train_labels, class_weights);
    tape.backward(loss);
    adam_step(result.params, train_cfg, epoch);

    std::vector<double> scores = node_scores(topo, features, model_cfg, result.params);
    double val_auc = val_usable ? subset_auc(scores, labels, split.val)
                                : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back({epoch, tape.value(loss).data[0], val_auc});

    if (!val_usable || val_auc > best_val) {
      best_val = val_usable ? val_auc : best_val;
      best = result.params;
      best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= train_cfg.patience) {
      break;
    }
  }

  result.params = best;
  result.best_epoch = best_epoch;
  result.best_val_auc = best_val;

  std::vector<double> scores = node_scores(topo, features, model_cfg, result.params);
  result.test_auc = (!split.test.empty() && has_both_classes(labels, split.test))
                        ? subset_auc(scores, labels, split.test)
                        : std::numeric_limits<double>::quiet_NaN();
  return result;
}

}  // namespace dgat
