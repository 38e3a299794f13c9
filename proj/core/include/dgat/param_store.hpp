#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "dgat/matrix.hpp"

namespace dgat {

// Named parameter tensors with accumulated gradients and Adam state slots.
// Iteration order is the lexicographic name order, which keeps every
// traversal (updates, serialization, finite differences) deterministic.
class ParamStore {
 public:
  struct Entry {
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;
  };

  void insert(const std::string& name, Matrix value) {
    if (entries_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    Entry e;
    e.grad = Matrix::zeros(value.rows, value.cols);
    e.adam_m = Matrix::zeros(value.rows, value.cols);
    e.adam_v = Matrix::zeros(value.rows, value.cols);
    e.value = std::move(value);
    entries_.emplace(name, std::move(e));
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Entry& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }
  const Entry& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }

  void zero_grads() {
    for (auto& [name, e] : entries_)
      std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }

  size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace dgat
