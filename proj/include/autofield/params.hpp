#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "autofield/error.hpp"
#include "autofield/matrix.hpp"

namespace autofield {

// One named trainable array with its gradient buffer. Shapes always match.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;

  Tensor(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
};

// Flat collection of named tensors. Handles are stable indices; the optimizer
// iterates the store in registration order.
class ParameterStore {
 public:
  std::size_t add(std::string name, Matrix value) {
    tensors_.emplace_back(std::move(name), std::move(value));
    return tensors_.size() - 1;
  }

  Tensor& operator[](std::size_t handle) { return tensors_[handle]; }
  const Tensor& operator[](std::size_t handle) const { return tensors_[handle]; }

  Tensor* find(std::string_view name) {
    for (auto& t : tensors_) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  std::size_t count() const { return tensors_.size(); }

  std::size_t total_parameters() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& t : tensors_) t.grad.fill(0.0);
  }

  void check_finite() const {
    for (const auto& t : tensors_) {
      if (!t.value.all_finite()) {
        throw NumericError("non-finite value in parameter '" + t.name + "'");
      }
    }
  }

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }

 private:
  std::vector<Tensor> tensors_;
};

}  // namespace autofield
