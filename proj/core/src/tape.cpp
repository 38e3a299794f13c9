#include "dgat/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dgat/param_store.hpp"

namespace dgat {

namespace {
void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

void Tape::check(const Matrix& m, const char* op) const {
  if (check_finite_ && !m.all_finite())
    throw std::runtime_error(std::string("non-finite values produced by ") + op);
}

Tensor Tape::push(Matrix value, BackwardFn backward, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  const Matrix& v = nodes_.back().value;
  return Tensor{static_cast<int>(nodes_.size()) - 1, v.rows, v.cols};
}

Tensor Tape::raw_op(Matrix value, BackwardFn backward, bool needs_grad) {
  check(value, "raw_op");
  return push(std::move(value), std::move(backward), needs_grad);
}

Tensor Tape::constant(Matrix m) {
  check(m, "constant");
  return push(std::move(m), nullptr, false);
}

Tensor Tape::leaf(Matrix m) {
  check(m, "leaf");
  return push(std::move(m), nullptr, true);
}

Tensor Tape::param(ParamStore& store, const std::string& name) {
  if (params_frozen_) return constant(store.at(name).value);
  Tensor t = leaf(store.at(name).value);
  nodes_[t.id].store = &store;
  nodes_[t.id].param_name = name;
  return t;
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  require(a.cols == b.rows, "matmul: inner dimensions do not match");
  Matrix out = dgat::matmul(value(a), value(b));
  check(out, "matmul");
  bool ng = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(out),
              [a, b](Tape& t, const Matrix& g) {
                if (t.nodes_[a.id].needs_grad) {
                  Matrix bt = transpose(t.value_ref(b.id));
                  matmul_into(g, bt, t.grad_ref(a.id), true);
                }
                if (t.nodes_[b.id].needs_grad) {
                  Matrix at = transpose(t.value_ref(a.id));
                  matmul_into(at, g, t.grad_ref(b.id), true);
                }
              },
              ng);
}

Tensor Tape::add(Tensor a, Tensor b) {
  require(a.rows == b.rows && a.cols == b.cols, "add: shape mismatch");
  Matrix out = value(a);
  const Matrix& bv = value(b);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
  check(out, "add");
  bool ng = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(out),
              [a, b](Tape& t, const Matrix& g) {
                for (int id : {a.id, b.id}) {
                  if (!t.nodes_[id].needs_grad) continue;
                  Matrix& dst = t.grad_ref(id);
                  for (size_t i = 0; i < g.data.size(); ++i) dst.data[i] += g.data[i];
                }
              },
              ng);
}

Tensor Tape::mul(Tensor a, Tensor b) {
  require(a.rows == b.rows && a.cols == b.cols, "mul: shape mismatch");
  Matrix out = value(a);
  const Matrix& bv = value(b);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
  check(out, "mul");
  bool ng = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push(std::move(out),
              [a, b](Tape& t, const Matrix& g) {
                if (t.nodes_[a.id].needs_grad) {
                  Matrix& da = t.grad_ref(a.id);
                  const Matrix& bv = t.value_ref(b.id);
                  for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i] * bv.data[i];
                }
                if (t.nodes_[b.id].needs_grad) {
                  Matrix& db = t.grad_ref(b.id);
                  const Matrix& av = t.value_ref(a.id);
                  for (size_t i = 0; i < g.data.size(); ++i) db.data[i] += g.data[i] * av.data[i];
                }
              },
              ng);
}

Tensor Tape::scale(Tensor a, double c) {
  Matrix out = value(a);
  for (double& v : out.data) v *= c;
  check(out, "scale");
  return push(std::move(out),
              [a, c](Tape& t, const Matrix& g) {
                if (!t.nodes_[a.id].needs_grad) return;
                Matrix& da = t.grad_ref(a.id);
                for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += c * g.data[i];
              },
              nodes_[a.id].needs_grad);
}

Tensor Tape::add_rowvec(Tensor a, Tensor row) {
  require(row.rows == 1 && row.cols == a.cols, "add_rowvec: row must be 1 x cols(a)");
  Matrix out = value(a);
  const Matrix& rv = value(row);
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += rv.at(0, j);
  check(out, "add_rowvec");
  bool ng = nodes_[a.id].needs_grad || nodes_[row.id].needs_grad;
  return push(std::move(out),
              [a, row](Tape& t, const Matrix& g) {
                if (t.nodes_[a.id].needs_grad) {
                  Matrix& da = t.grad_ref(a.id);
                  for (size_t i = 0; i < g.data.size(); ++i) da.data[i] += g.data[i];
                }
                if (t.nodes_[row.id].needs_grad) {
                  Matrix& dr = t.grad_ref(row.id);
                  for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) dr.at(0, j) += g.at(i, j);
                }
              },
              ng);
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
  require(a.rows == b.rows, "concat_cols: row counts differ");
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  Matrix out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) out.at(i, j) = av.at(i, j);
    for (int j = 0; j < b.cols; ++j) out.at(i, a.cols + j) = bv.at(i, j);
  }
  bool ng = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  int acols = a.cols, bcols = b.cols;
  return push(std::move(out),
              [a, b, acols, bcols](Tape& t, const Matrix& g) {
                if (t.nodes_[a.id].needs_grad) {
                  Matrix& da = t.grad_ref(a.id);
                  for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < acols; ++j) da.at(i, j) += g.at(i, j);
                }
                if (t.nodes_[b.id].needs_grad) {
                  Matrix& db = t.grad_ref(b.id);
                  for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < bcols; ++j) db.at(i, j) += g.at(i, acols + j);
                }
              },
              ng);
}

Tensor Tape::concat_rows(Tensor a, Tensor b) {
  require(a.cols == b.cols, "concat_rows: column counts differ");
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  Matrix out(a.rows + b.rows, a.cols);
  std::copy(av.data.begin(), av.data.end(), out.data.begin());
  std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + av.data.size());
  bool ng = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  int arows = a.rows;
  return push(std::move(out),
              [a, b, arows](Tape& t, const Matrix& g) {
                if (t.nodes_[a.id].needs_grad) {
                  Matrix& da = t.grad_ref(a.id);
                  for (size_t i = 0; i < da.data.size(); ++i) da.data[i] += g.data[i];
                }
                if (t.nodes_[b.id].needs_grad) {
                  Matrix& db = t.grad_ref(b.id);
                  size_t off = static_cast<size_t>(arows) * g.cols;
                  for (size_t i = 0; i < db.data.size(); ++i) db.data[i] += g.data[off + i];
                }
              },
              ng);
}

Tensor Tape::gather_rows(Tensor x, std::vector<int> idx) {
  const Matrix& xv = value(x);
  for (int i : idx)
    if (i < 0 || i >= x.rows) throw std::out_of_range("gather_rows: index out of range");
  Matrix out(static_cast<int>(idx.size()), x.cols);
  for (size_t e = 0; e < idx.size(); ++e)
    for (int j = 0; j < x.cols; ++j) out.at(static_cast<int>(e), j) = xv.at(idx[e], j);
  auto shared = std::make_shared<std::vector<int>>(std::move(idx));
  return push(std::move(out),
              [x, shared](Tape& t, const Matrix& g) {
                if (!t.nodes_[x.id].needs_grad) return;
                Matrix& dx = t.grad_ref(x.id);
                for (size_t e = 0; e < shared->size(); ++e)
                  for (int j = 0; j < g.cols; ++j)
                    dx.at((*shared)[e], j) += g.at(static_cast<int>(e), j);
              },
              nodes_[x.id].needs_grad);
}

Tensor Tape::leaky_relu(Tensor x, double slope) {
  Matrix out = value(x);
  for (double& v : out.data) v = v >= 0.0 ? v : slope * v;
  check(out, "leaky_relu");
  return push(std::move(out),
              [x, slope](Tape& t, const Matrix& g) {
                if (!t.nodes_[x.id].needs_grad) return;
                Matrix& dx = t.grad_ref(x.id);
                const Matrix& xv = t.value_ref(x.id);
                // subgradient at exactly 0 is 1
                for (size_t i = 0; i < g.data.size(); ++i)
                  dx.data[i] += g.data[i] * (xv.data[i] >= 0.0 ? 1.0 : slope);
              },
              nodes_[x.id].needs_grad);
}

Tensor Tape::sigmoid(Tensor x) {
  Matrix out = value(x);
  for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  check(out, "sigmoid");
  Tensor res = push(std::move(out), nullptr, nodes_[x.id].needs_grad);
  int out_id = res.id;
  nodes_[out_id].backward = [x, out_id](Tape& t, const Matrix& g) {
    if (!t.nodes_[x.id].needs_grad) return;
    Matrix& dx = t.grad_ref(x.id);
    const Matrix& s = t.value_ref(out_id);
    for (size_t i = 0; i < g.data.size(); ++i)
      dx.data[i] += g.data[i] * s.data[i] * (1.0 - s.data[i]);
  };
  return res;
}

Tensor Tape::sum(Tensor x) {
  double s = 0.0;
  for (double v : value(x).data) s += v;
  Matrix out(1, 1);
  out.data[0] = s;
  check(out, "sum");
  return push(std::move(out),
              [x](Tape& t, const Matrix& g) {
                if (!t.nodes_[x.id].needs_grad) return;
                Matrix& dx = t.grad_ref(x.id);
                for (double& v : dx.data) v += g.data[0];
              },
              nodes_[x.id].needs_grad);
}

Tensor Tape::mean(Tensor x) {
  const size_t n = value(x).data.size();
  require(n > 0, "mean of empty tensor");
  double s = 0.0;
  for (double v : value(x).data) s += v;
  Matrix out(1, 1);
  out.data[0] = s / static_cast<double>(n);
  check(out, "mean");
  return push(std::move(out),
              [x, n](Tape& t, const Matrix& g) {
                if (!t.nodes_[x.id].needs_grad) return;
                Matrix& dx = t.grad_ref(x.id);
                double c = g.data[0] / static_cast<double>(n);
                for (double& v : dx.data) v += c;
              },
              nodes_[x.id].needs_grad);
}

Tensor Tape::segment_softmax(Tensor scores, std::vector<int> segment_of, int num_segments) {
  require(scores.cols == 1, "segment_softmax: scores must be E x 1");
  require(static_cast<int>(segment_of.size()) == scores.rows,
          "segment_softmax: segment map length mismatch");
  const Matrix& sv = value(scores);
  const int e_count = scores.rows;
  for (int s : segment_of)
    require(s >= 0 && s < num_segments, "segment_softmax: segment id out of range");

  std::vector<double> segmax(num_segments, -std::numeric_limits<double>::infinity());
  for (int e = 0; e < e_count; ++e)
    segmax[segment_of[e]] = std::max(segmax[segment_of[e]], sv.data[e]);
  std::vector<double> segsum(num_segments, 0.0);
  Matrix out(e_count, 1);
  for (int e = 0; e < e_count; ++e) {
    out.data[e] = std::exp(sv.data[e] - segmax[segment_of[e]]);
    segsum[segment_of[e]] += out.data[e];
  }
  for (int e = 0; e < e_count; ++e) out.data[e] /= segsum[segment_of[e]];
  check(out, "segment_softmax");

  auto seg = std::make_shared<std::vector<int>>(std::move(segment_of));
  Tensor res = push(std::move(out), nullptr, nodes_[scores.id].needs_grad);
  int out_id = res.id;
  nodes_[out_id].backward = [scores, seg, num_segments, out_id](Tape& t, const Matrix& g) {
    if (!t.nodes_[scores.id].needs_grad) return;
    const Matrix& p = t.value_ref(out_id);
    Matrix& ds = t.grad_ref(scores.id);
    // d score_e = p_e * (g_e - sum over segment of p_f * g_f)
    std::vector<double> dot(num_segments, 0.0);
    for (int e = 0; e < p.rows; ++e) dot[(*seg)[e]] += p.data[e] * g.data[e];
    for (int e = 0; e < p.rows; ++e)
      ds.data[e] += p.data[e] * (g.data[e] - dot[(*seg)[e]]);
  };
  return res;
}

Tensor Tape::segment_weighted_sum(Tensor weights, Tensor messages, std::vector<int> segment_of,
                                  int num_segments) {
  require(weights.cols == 1, "segment_weighted_sum: weights must be E x 1");
  require(weights.rows == messages.rows, "segment_weighted_sum: weights/messages misaligned");
  require(static_cast<int>(segment_of.size()) == weights.rows,
          "segment_weighted_sum: segment map length mismatch");
  const Matrix& wv = value(weights);
  const Matrix& mv = value(messages);
  const int d = messages.cols;
  Matrix out(num_segments, d);
  for (int e = 0; e < weights.rows; ++e) {
    int s = segment_of[e];
    require(s >= 0 && s < num_segments, "segment_weighted_sum: segment id out of range");
    for (int j = 0; j < d; ++j) out.at(s, j) += wv.data[e] * mv.at(e, j);
  }
  check(out, "segment_weighted_sum");

  auto seg = std::make_shared<std::vector<int>>(std::move(segment_of));
  bool ng = nodes_[weights.id].needs_grad || nodes_[messages.id].needs_grad;
  return push(std::move(out),
              [weights, messages, seg, d](Tape& t, const Matrix& g) {
                const Matrix& wv = t.value_ref(weights.id);
                const Matrix& mv = t.value_ref(messages.id);
                if (t.nodes_[weights.id].needs_grad) {
                  Matrix& dw = t.grad_ref(weights.id);
                  for (int e = 0; e < wv.rows; ++e) {
                    double acc = 0.0;
                    for (int j = 0; j < d; ++j) acc += g.at((*seg)[e], j) * mv.at(e, j);
                    dw.data[e] += acc;
                  }
                }
                if (t.nodes_[messages.id].needs_grad) {
                  Matrix& dm = t.grad_ref(messages.id);
                  for (int e = 0; e < wv.rows; ++e)
                    for (int j = 0; j < d; ++j) dm.at(e, j) += wv.data[e] * g.at((*seg)[e], j);
                }
              },
              ng);
}

Tensor Tape::row_softmax(Tensor logits) {
  const Matrix& lv = value(logits);
  Matrix out(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < logits.cols; ++j) mx = std::max(mx, lv.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      out.at(i, j) = std::exp(lv.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int j = 0; j < logits.cols; ++j) out.at(i, j) /= sum;
  }
  check(out, "row_softmax");
  Tensor res = push(std::move(out), nullptr, nodes_[logits.id].needs_grad);
  int out_id = res.id;
  nodes_[out_id].backward = [logits, out_id](Tape& t, const Matrix& g) {
    if (!t.nodes_[logits.id].needs_grad) return;
    const Matrix& p = t.value_ref(out_id);
    Matrix& dl = t.grad_ref(logits.id);
    for (int i = 0; i < p.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < p.cols; ++j) dot += p.at(i, j) * g.at(i, j);
      for (int j = 0; j < p.cols; ++j) dl.at(i, j) += p.at(i, j) * (g.at(i, j) - dot);
    }
  };
  return res;
}

Tensor Tape::softmax_cross_entropy(Tensor logits, const std::vector<int>& labels,
                                   const std::vector<double>& weight_per_class) {
  require(static_cast<int>(labels.size()) == logits.rows,
          "softmax_cross_entropy: one label per row required");
  const int c_count = logits.cols;
  for (int y : labels)
    if (y < 0 || y >= c_count) throw std::out_of_range("softmax_cross_entropy: label out of range");
  require(static_cast<int>(weight_per_class.size()) == c_count,
          "softmax_cross_entropy: one weight per class required");

  const Matrix& lv = value(logits);
  const int n = logits.rows;
  auto probs = std::make_shared<Matrix>(n, c_count);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < c_count; ++j) mx = std::max(mx, lv.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < c_count; ++j) {
      probs->at(i, j) = std::exp(lv.at(i, j) - mx);
      sum += probs->at(i, j);
    }
    for (int j = 0; j < c_count; ++j) probs->at(i, j) /= sum;
    double log_p = (lv.at(i, labels[i]) - mx) - std::log(sum);
    total += -weight_per_class[labels[i]] * log_p;
  }
  Matrix out(1, 1);
  out.data[0] = total / n;
  check(out, "softmax_cross_entropy");

  auto labels_sh = std::make_shared<std::vector<int>>(labels);
  auto weights_sh = std::make_shared<std::vector<double>>(weight_per_class);
  return push(std::move(out),
              [logits, probs, labels_sh, weights_sh, n](Tape& t, const Matrix& g) {
                if (!t.nodes_[logits.id].needs_grad) return;
                Matrix& dl = t.grad_ref(logits.id);
                double c = g.data[0] / n;
                for (int i = 0; i < probs->rows; ++i) {
                  double w = (*weights_sh)[(*labels_sh)[i]];
                  for (int j = 0; j < probs->cols; ++j) {
                    double ind = (j == (*labels_sh)[i]) ? 1.0 : 0.0;
                    dl.at(i, j) += c * w * (probs->at(i, j) - ind);
                  }
                }
              },
              nodes_[logits.id].needs_grad);
}

Tensor Tape::mean_binary_entropy(Tensor x) {
  const Matrix& xv = value(x);
  const size_t n = xv.data.size();
  require(n > 0, "mean_binary_entropy of empty tensor");
  auto ent = [](double m) {
    m = std::clamp(m, 1e-12, 1.0 - 1e-12);
    return -m * std::log(m) - (1.0 - m) * std::log(1.0 - m);
  };
  double total = 0.0;
  for (double v : xv.data) total += ent(v);
  Matrix out(1, 1);
  out.data[0] = total / static_cast<double>(n);
  check(out, "mean_binary_entropy");
  return push(std::move(out),
              [x, n](Tape& t, const Matrix& g) {
                if (!t.nodes_[x.id].needs_grad) return;
                Matrix& dx = t.grad_ref(x.id);
                const Matrix& xv = t.value_ref(x.id);
                double c = g.data[0] / static_cast<double>(n);
                for (size_t i = 0; i < xv.data.size(); ++i) {
                  double m = std::clamp(xv.data[i], 1e-12, 1.0 - 1e-12);
                  dx.data[i] += c * std::log((1.0 - m) / m);
                }
              },
              nodes_[x.id].needs_grad);
}

void Tape::backward(Tensor loss) {
  if (loss.rows != 1 || loss.cols != 1)
    throw std::invalid_argument("backward requires a scalar (1x1) loss");
  for (Node& n : nodes_) n.grad = Matrix::zeros(n.value.rows, n.value.cols);
  nodes_[loss.id].grad.data[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
  for (Node& n : nodes_) {
    if (!n.store) continue;
    Matrix& dst = n.store->at(n.param_name).grad;
    if (!dst.same_shape(n.grad))
      throw std::runtime_error("parameter gradient shape mismatch for " + n.param_name);
    for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += n.grad.data[i];
  }
}

}  // namespace dgat
