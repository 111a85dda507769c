// Copyright (c) 2026 cassnat authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASSNAT_NUMCORE_TENSOR_H_
#define CASSNAT_NUMCORE_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cassnat/util/common.h"

namespace cassnat {

using Shape = std::vector<int>;

int64_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

class Tensor;

// One node of the recorded computation graph. Operations that produce a
// gradient-tracked output store their inputs in `parents` and a closure that
// pushes this node's grad into the parents' grads. The graph is a DAG by
// construction (outputs are never mutated after creation), so a reverse
// post-order walk from the loss visits consumers before producers.
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // allocated lazily, same length as data
  std::vector<Tensor> parents;
  std::function<void(TensorNode&)> backward_fn;
  bool backward_done = false;
};

// Value-semantic handle onto a shared graph node. Double precision storage;
// single precision exists only at the checkpoint serialization boundary.
class Tensor {
 public:
  Tensor() = default;

  // Fresh node filled with zeros.
  static Tensor Zeros(const Shape& shape, bool requires_grad = false);
  static Tensor Full(const Shape& shape, double value,
                     bool requires_grad = false);
  static Tensor FromData(const Shape& shape, std::vector<double> data,
                         bool requires_grad = false);
  static Tensor Scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int rank() const;
  int dim(int i) const;
  int64_t numel() const;
  // 2-D convenience: rank-1 tensors count as a single row.
  int rows() const;
  int cols() const;

  bool requires_grad() const;

  double item() const;  // requires numel() == 1
  std::vector<double>& data();
  const std::vector<double>& data() const;
  double at(int64_t i) const { return data()[i]; }
  double at2(int r, int c) const { return data()[static_cast<int64_t>(r) * cols() + c]; }

  bool has_grad() const;
  // Grad buffer, allocated (zeroed) on first touch.
  std::vector<double>& MutableGrad();
  const std::vector<double>& grad() const;  // contract error if never populated
  void ZeroGrad();

  TensorNode* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor NewTensorNode(Shape shape, bool requires_grad);
};

// Internal factory used by the op library.
Tensor NewTensorNode(Shape shape, bool requires_grad);

// Runs reverse-mode accumulation from a scalar loss. Populates grads of every
// reachable requires_grad tensor. Calling it twice on the same loss without
// rebuilding the graph is a contract error.
void Backward(const Tensor& loss);

// When grad mode is off (inference), ops skip recording the graph entirely.
bool GradEnabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

}  // namespace cassnat

#endif  // CASSNAT_NUMCORE_TENSOR_H_
