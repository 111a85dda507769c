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

#ifndef CASSNAT_NUMCORE_OPS_H_
#define CASSNAT_NUMCORE_OPS_H_

#include <cstdint>
#include <vector>

#include "cassnat/numcore/tensor.h"
#include "cassnat/util/rng.h"

namespace cassnat {
namespace ops {

// All primitives operate on small dense tensors, record the graph when any
// input tracks gradients, and have analytic backward rules (checked against
// finite differences in the tests). Elementwise binary ops accept either
// identical shapes or a rank-1 right operand broadcast across the rows of a
// rank-2 left operand (the bias-add case).

Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& a, double c);

Tensor Exp(const Tensor& a);
Tensor Log(const Tensor& a);
// Elementwise stable log(exp(a) + exp(b)); shapes must match.
Tensor LogAddExp(const Tensor& a, const Tensor& b);
Tensor Sigmoid(const Tensor& a);
Tensor Relu(const Tensor& a);
Tensor Swish(const Tensor& a);
// Gated linear unit over the last axis: [n, 2c] -> [n, c].
Tensor Glu(const Tensor& a);

// Softmax family over the last axis (rank-1 tensors count as one row).
Tensor Softmax(const Tensor& a);
Tensor LogSoftmax(const Tensor& a);

// Per-row layer normalization with affine parameters. A zero-variance row
// normalizes to zeros (the epsilon keeps it finite), then the affine applies.
Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps = 1e-5);

// Time convolution: x [T, c_in], w [K, c_in, c_out], b [c_out]. Zero padding
// of `pad` frames on both sides, stride >= 1.
Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int pad);
// Per-channel time convolution with same-length output: x [T, c], w [K, c]
// (K odd), b [c].
Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, const Tensor& b);

// Row lookup: out[i, :] = table[ids[i], :].
Tensor Embedding(const std::vector<int>& ids, const Tensor& table);

// Concatenation of 2-D tensors along axis 0 or 1 (rank-1 along axis 0).
Tensor Concat(const std::vector<Tensor>& parts, int axis);
Tensor Transpose(const Tensor& a);
// Half-open row/column ranges of a 2-D tensor.
Tensor Slice(const Tensor& a, int r0, int r1, int c0, int c1);
Tensor Reshape(const Tensor& a, const Shape& shape);
// Column gather: out[i, j] = a[i, cols[j]]. Duplicate columns accumulate
// gradient.
Tensor GatherCols(const Tensor& a, const std::vector<int>& cols);

// out[i] = mask[i] ? value : a[i]. The mask is constant; no gradient flows
// into filled positions.
Tensor MaskedFill(const Tensor& a, const std::vector<uint8_t>& mask,
                  double value);

Tensor ReduceSum(const Tensor& a);   // -> shape {1}
Tensor ReduceMean(const Tensor& a);  // -> shape {1}

// Inverted dropout. Training mode only: a null rng (or p == 0) is the
// identity, which is what inference uses.
Tensor Dropout(const Tensor& a, double p, Rng* rng);

}  // namespace ops
}  // namespace cassnat

#endif  // CASSNAT_NUMCORE_OPS_H_
