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

#include "cassnat/numcore/tensor.h"

#include <sstream>
#include <unordered_set>
#include <utility>

namespace cassnat {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape " + ShapeToString(shape));
    n *= d;
  }
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor NewTensorNode(Shape shape, bool requires_grad) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data.assign(static_cast<size_t>(NumElements(node->shape)), 0.0);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::Zeros(const Shape& shape, bool requires_grad) {
  return NewTensorNode(shape, requires_grad);
}

Tensor Tensor::Full(const Shape& shape, double value, bool requires_grad) {
  Tensor t = NewTensorNode(shape, requires_grad);
  for (auto& x : t.data()) x = value;
  return t;
}

Tensor Tensor::FromData(const Shape& shape, std::vector<double> data,
                        bool requires_grad) {
  if (static_cast<int64_t>(data.size()) != NumElements(shape)) {
    throw DimensionError("FromData: " + std::to_string(data.size()) +
                         " values for shape " + ShapeToString(shape));
  }
  Tensor t = NewTensorNode(shape, requires_grad);
  t.node()->data = std::move(data);
  return t;
}

Tensor Tensor::Scalar(double value) { return Full({1}, value, false); }

const Shape& Tensor::shape() const {
  CheckContract(defined(), "shape() on undefined tensor");
  return node_->shape;
}

int Tensor::rank() const { return static_cast<int>(shape().size()); }

int Tensor::dim(int i) const {
  const Shape& s = shape();
  CheckContract(i >= 0 && i < static_cast<int>(s.size()),
                "dim(): axis out of range");
  return s[i];
}

int64_t Tensor::numel() const { return NumElements(shape()); }

int Tensor::rows() const {
  const Shape& s = shape();
  if (s.size() == 1) return 1;
  if (s.size() == 2) return s[0];
  throw DimensionError("rows(): tensor of shape " + ShapeToString(s) +
                       " is not 1-D or 2-D");
}

int Tensor::cols() const {
  const Shape& s = shape();
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[1];
  throw DimensionError("cols(): tensor of shape " + ShapeToString(s) +
                       " is not 1-D or 2-D");
}

bool Tensor::requires_grad() const {
  return defined() && node_->requires_grad;
}

double Tensor::item() const {
  CheckContract(defined() && numel() == 1,
                "item(): tensor is not a defined scalar");
  return node_->data[0];
}

std::vector<double>& Tensor::data() {
  CheckContract(defined(), "data() on undefined tensor");
  return node_->data;
}

const std::vector<double>& Tensor::data() const {
  CheckContract(defined(), "data() on undefined tensor");
  return node_->data;
}

bool Tensor::has_grad() const {
  return defined() && !node_->grad.empty();
}

std::vector<double>& Tensor::MutableGrad() {
  CheckContract(defined(), "MutableGrad() on undefined tensor");
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
  CheckContract(has_grad(), "grad(): gradient was never populated");
  return node_->grad;
}

void Tensor::ZeroGrad() {
  if (defined() && !node_->grad.empty()) {
    node_->grad.assign(node_->data.size(), 0.0);
  }
}

bool GradEnabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void Backward(const Tensor& loss) {
  CheckContract(loss.defined(), "Backward: undefined loss tensor");
  CheckContract(loss.numel() == 1, "Backward: loss must be a scalar, got " +
                                       ShapeToString(loss.shape()));
  TensorNode* root = loss.node();
  CheckContract(!root->backward_done,
                "Backward: called twice on the same graph without re-running "
                "the forward pass");
  root->backward_done = true;

  // Iterative DFS post-order over parent edges. Reversed, it yields a
  // topological order with every consumer before its producers.
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  struct Frame {
    TensorNode* n;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({root, 0});
  seen.insert(root);
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.n->parents.size()) {
      TensorNode* p = f.n->parents[f.next_parent++].node();
      if (p != nullptr && seen.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  root->grad.assign(root->data.size(), 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->grad.empty()) n->grad.assign(n->data.size(), 0.0);
    if (n->backward_fn) n->backward_fn(*n);
  }
}

}  // namespace cassnat
