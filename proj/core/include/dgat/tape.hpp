#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dgat/matrix.hpp"

namespace dgat {

class Tape;
class ParamStore;

// Handle to a value recorded on a Tape.
struct Tensor {
  int id = -1;
  int rows = 0;
  int cols = 0;
};

// Reverse-mode tape over dense matrices. Operations append nodes in
// topological order; backward() visits them in exact reverse order.
// A tape is confined to one logical thread.
class Tape {
 public:
  Tape() = default;

  // When enabled, every operation result is checked for NaN/Inf.
  void set_check_finite(bool on) { check_finite_ = on; }

  // When frozen, param() records plain constants: the model is evaluated but
  // receives no gradients (used by the explainer against a trained model).
  void set_params_frozen(bool on) { params_frozen_ = on; }

  const Matrix& value(Tensor t) const { return nodes_[t.id].value; }
  const Matrix& grad(Tensor t) const { return nodes_[t.id].grad; }

  Tensor constant(Matrix m);
  // Leaf that participates in gradients; backward() copies its gradient into
  // the named parameter's grad slot in the store it was created from.
  Tensor param(ParamStore& store, const std::string& name);
  // Gradient-tracked leaf not tied to a store (used by grad_check and the
  // explainer's mask logits).
  Tensor leaf(Matrix m);

  Tensor matmul(Tensor a, Tensor b);
  Tensor add(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);  // elementwise
  Tensor scale(Tensor a, double c);
  Tensor add_rowvec(Tensor a, Tensor row);  // row is 1 x cols, added to every row of a
  Tensor concat_cols(Tensor a, Tensor b);
  Tensor concat_rows(Tensor a, Tensor b);
  Tensor gather_rows(Tensor x, std::vector<int> idx);
  Tensor leaky_relu(Tensor x, double slope);
  Tensor sigmoid(Tensor x);
  Tensor sum(Tensor x);   // 1x1
  Tensor mean(Tensor x);  // 1x1

  // Softmax computed independently within each segment; segment_of maps each
  // row of scores (an E x 1 column) to its segment. Outputs sum to 1 within
  // every non-empty segment, stabilized by a per-segment max shift.
  Tensor segment_softmax(Tensor scores, std::vector<int> segment_of, int num_segments);

  // Row i of the result is the sum over edges e with segment_of[e] == i of
  // weights[e] * messages[e]; empty segments yield a zero row.
  Tensor segment_weighted_sum(Tensor weights, Tensor messages, std::vector<int> segment_of,
                              int num_segments);

  // Row-wise softmax probabilities (used by the classification head).
  Tensor row_softmax(Tensor logits);

  // Mean over rows of class_weight[label] * -log softmax(logit_row)[label].
  Tensor softmax_cross_entropy(Tensor logits, const std::vector<int>& labels,
                               const std::vector<double>& weight_per_class);

  // Mean binary entropy -m log m - (1-m) log(1-m) of entries in (0,1).
  Tensor mean_binary_entropy(Tensor x);

  // Generic node: callers may register custom operations. backward receives
  // the tape and the node's own gradient and must accumulate into the inputs'
  // gradients via grad_ref().
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;
  Tensor raw_op(Matrix value, BackwardFn backward, bool needs_grad);

  Matrix& grad_ref(Tensor t) { return nodes_[t.id].grad; }
  Matrix& grad_ref(int id) { return nodes_[id].grad; }
  const Matrix& value_ref(int id) const { return nodes_[id].value; }

  // Seeds d(loss) = 1 and propagates; loss must be 1x1. Parameter leaves
  // created via param() have their gradients accumulated into their store.
  void backward(Tensor loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
    ParamStore* store = nullptr;
    std::string param_name;
  };

  Tensor push(Matrix value, BackwardFn backward, bool needs_grad);
  void check(const Matrix& m, const char* op) const;

  std::vector<Node> nodes_;
  bool check_finite_ = false;
  bool params_frozen_ = false;
};

}  // namespace dgat
