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

#include "cassnat/numcore/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace cassnat {
namespace ops {

namespace {

void RequireDefined(const Tensor& t, const char* op) {
  CheckContract(t.defined(), std::string(op) + ": undefined input tensor");
}

bool Track2(const Tensor& a, const Tensor& b) {
  return GradEnabled() && (a.requires_grad() || b.requires_grad());
}

bool Track1(const Tensor& a) { return GradEnabled() && a.requires_grad(); }

void AddInto(std::vector<double>& acc, const std::vector<double>& g) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

// Broadcast layout for the elementwise binary ops.
enum class Broadcast { kSame, kRow };

Broadcast BinaryLayout(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (a.rank() == 2 && b.rank() == 1 && b.dim(0) == a.dim(1)) {
    return Broadcast::kRow;
  }
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeToString(a.shape()) + " and " +
                       ShapeToString(b.shape()));
}

double SigmoidScalar(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireDefined(a, "matmul");
  RequireDefined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " +
                         ShapeToString(a.shape()) + " and " +
                         ShapeToString(b.shape()));
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  bool track = Track2(a, b);
  Tensor out = NewTensorNode({m, n}, track);
  {
    const auto& A = a.data();
    const auto& B = b.data();
    auto& O = out.data();
    for (int i = 0; i < m; ++i) {
      for (int p = 0; p < k; ++p) {
        double av = A[static_cast<size_t>(i) * k + p];
        if (av == 0.0) continue;
        const double* brow = B.data() + static_cast<size_t>(p) * n;
        double* orow = O.data() + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
  }
  if (track) {
    out.node()->parents = {a, b};
    out.node()->backward_fn = [m, k, n](TensorNode& o) {
      const auto& G = o.grad;
      Tensor pa = o.parents[0];
      Tensor pb = o.parents[1];
      if (pa.requires_grad()) {
        auto& dA = pa.MutableGrad();
        const auto& B = pb.data();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            double gv = G[static_cast<size_t>(i) * n + j];
            if (gv == 0.0) continue;
            for (int p = 0; p < k; ++p) {
              dA[static_cast<size_t>(i) * k + p] +=
                  gv * B[static_cast<size_t>(p) * n + j];
            }
          }
        }
      }
      if (pb.requires_grad()) {
        auto& dB = pb.MutableGrad();
        const auto& A = pa.data();
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            double av = A[static_cast<size_t>(i) * k + p];
            if (av == 0.0) continue;
            const double* grow = G.data() + static_cast<size_t>(i) * n;
            double* drow = dB.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) drow[j] += av * grow[j];
          }
        }
      }
    };
  }
  return out;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireDefined(a, "add");
  RequireDefined(b, "add");
  Broadcast layout = BinaryLayout(a, b, "add");
  bool track = Track2(a, b);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  const auto& B = b.data();
  auto& O = out.data();
  if (layout == Broadcast::kSame) {
    for (size_t i = 0; i < O.size(); ++i) O[i] = A[i] + B[i];
  } else {
    const int rows = a.dim(0), cols = a.dim(1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        O[static_cast<size_t>(i) * cols + j] =
            A[static_cast<size_t>(i) * cols + j] + B[j];
      }
    }
  }
  if (track) {
    out.node()->parents = {a, b};
    out.node()->backward_fn = [layout](TensorNode& o) {
      Tensor pa = o.parents[0];
      Tensor pb = o.parents[1];
      if (pa.requires_grad()) AddInto(pa.MutableGrad(), o.grad);
      if (pb.requires_grad()) {
        auto& dB = pb.MutableGrad();
        if (layout == Broadcast::kSame) {
          AddInto(dB, o.grad);
        } else {
          const int cols = o.shape[1];
          const int rows = o.shape[0];
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              dB[j] += o.grad[static_cast<size_t>(i) * cols + j];
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor Sub(const Tensor& a, const Tensor& b) { return Add(a, Scale(b, -1.0)); }

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireDefined(a, "mul");
  RequireDefined(b, "mul");
  Broadcast layout = BinaryLayout(a, b, "mul");
  bool track = Track2(a, b);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  const auto& B = b.data();
  auto& O = out.data();
  if (layout == Broadcast::kSame) {
    for (size_t i = 0; i < O.size(); ++i) O[i] = A[i] * B[i];
  } else {
    const int rows = a.dim(0), cols = a.dim(1);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        O[static_cast<size_t>(i) * cols + j] =
            A[static_cast<size_t>(i) * cols + j] * B[j];
      }
    }
  }
  if (track) {
    out.node()->parents = {a, b};
    out.node()->backward_fn = [layout](TensorNode& o) {
      Tensor pa = o.parents[0];
      Tensor pb = o.parents[1];
      const auto& A = pa.data();
      const auto& B = pb.data();
      if (layout == Broadcast::kSame) {
        if (pa.requires_grad()) {
          auto& dA = pa.MutableGrad();
          for (size_t i = 0; i < dA.size(); ++i) dA[i] += o.grad[i] * B[i];
        }
        if (pb.requires_grad()) {
          auto& dB = pb.MutableGrad();
          for (size_t i = 0; i < dB.size(); ++i) dB[i] += o.grad[i] * A[i];
        }
      } else {
        const int rows = o.shape[0], cols = o.shape[1];
        if (pa.requires_grad()) {
          auto& dA = pa.MutableGrad();
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              dA[static_cast<size_t>(i) * cols + j] +=
                  o.grad[static_cast<size_t>(i) * cols + j] * B[j];
            }
          }
        }
        if (pb.requires_grad()) {
          auto& dB = pb.MutableGrad();
          for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
              dB[j] += o.grad[static_cast<size_t>(i) * cols + j] *
                       A[static_cast<size_t>(i) * cols + j];
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor Scale(const Tensor& a, double c) {
  RequireDefined(a, "scale");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = c * A[i];
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [c](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (size_t i = 0; i < dA.size(); ++i) dA[i] += c * o.grad[i];
    };
  }
  return out;
}

Tensor Exp(const Tensor& a) {
  RequireDefined(a, "exp");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = std::exp(A[i]);
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (size_t i = 0; i < dA.size(); ++i) dA[i] += o.grad[i] * o.data[i];
    };
  }
  return out;
}

Tensor Log(const Tensor& a) {
  RequireDefined(a, "log");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = std::log(A[i]);
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      const auto& A = pa.data();
      for (size_t i = 0; i < dA.size(); ++i) dA[i] += o.grad[i] / A[i];
    };
  }
  return out;
}

Tensor LogAddExp(const Tensor& a, const Tensor& b) {
  RequireDefined(a, "logaddexp");
  RequireDefined(b, "logaddexp");
  if (a.shape() != b.shape()) {
    throw DimensionError("logaddexp: shapes " + ShapeToString(a.shape()) +
                         " and " + ShapeToString(b.shape()) + " differ");
  }
  bool track = Track2(a, b);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  const auto& B = b.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) {
    double hi = std::max(A[i], B[i]);
    double lo = std::min(A[i], B[i]);
    O[i] = hi + std::log1p(std::exp(lo - hi));
  }
  if (track) {
    out.node()->parents = {a, b};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      Tensor pb = o.parents[1];
      const auto& A = pa.data();
      const auto& B = pb.data();
      if (pa.requires_grad()) {
        auto& dA = pa.MutableGrad();
        for (size_t i = 0; i < dA.size(); ++i) {
          dA[i] += o.grad[i] * std::exp(A[i] - o.data[i]);
        }
      }
      if (pb.requires_grad()) {
        auto& dB = pb.MutableGrad();
        for (size_t i = 0; i < dB.size(); ++i) {
          dB[i] += o.grad[i] * std::exp(B[i] - o.data[i]);
        }
      }
    };
  }
  return out;
}

Tensor Sigmoid(const Tensor& a) {
  RequireDefined(a, "sigmoid");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = SigmoidScalar(A[i]);
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (size_t i = 0; i < dA.size(); ++i) {
        dA[i] += o.grad[i] * o.data[i] * (1.0 - o.data[i]);
      }
    };
  }
  return out;
}

Tensor Relu(const Tensor& a) {
  RequireDefined(a, "relu");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = A[i] > 0.0 ? A[i] : 0.0;
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      const auto& A = pa.data();
      for (size_t i = 0; i < dA.size(); ++i) {
        if (A[i] > 0.0) dA[i] += o.grad[i];
      }
    };
  }
  return out;
}

Tensor Swish(const Tensor& a) {
  RequireDefined(a, "swish");
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = A[i] * SigmoidScalar(A[i]);
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      const auto& A = pa.data();
      for (size_t i = 0; i < dA.size(); ++i) {
        double s = SigmoidScalar(A[i]);
        dA[i] += o.grad[i] * (s + A[i] * s * (1.0 - s));
      }
    };
  }
  return out;
}

Tensor Glu(const Tensor& a) {
  RequireDefined(a, "glu");
  if (a.rank() != 2 || a.dim(1) % 2 != 0) {
    throw DimensionError("glu: needs an even last axis, got " +
                         ShapeToString(a.shape()));
  }
  const int rows = a.dim(0), c = a.dim(1) / 2;
  bool track = Track1(a);
  Tensor out = NewTensorNode({rows, c}, track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < c; ++j) {
      double lin = A[static_cast<size_t>(i) * 2 * c + j];
      double gate = SigmoidScalar(A[static_cast<size_t>(i) * 2 * c + c + j]);
      O[static_cast<size_t>(i) * c + j] = lin * gate;
    }
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [rows, c](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      const auto& A = pa.data();
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < c; ++j) {
          double g = o.grad[static_cast<size_t>(i) * c + j];
          double lin = A[static_cast<size_t>(i) * 2 * c + j];
          double s = SigmoidScalar(A[static_cast<size_t>(i) * 2 * c + c + j]);
          dA[static_cast<size_t>(i) * 2 * c + j] += g * s;
          dA[static_cast<size_t>(i) * 2 * c + c + j] +=
              g * lin * s * (1.0 - s);
        }
      }
    };
  }
  return out;
}

Tensor Softmax(const Tensor& a) {
  RequireDefined(a, "softmax");
  if (a.rank() > 2) {
    throw DimensionError("softmax: rank-1 or rank-2 only, got " +
                         ShapeToString(a.shape()));
  }
  const int rows = a.rows(), cols = a.cols();
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < rows; ++i) {
    const double* x = A.data() + static_cast<size_t>(i) * cols;
    double* y = O.data() + static_cast<size_t>(i) * cols;
    double hi = x[0];
    for (int j = 1; j < cols; ++j) hi = std::max(hi, x[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - hi);
      z += y[j];
    }
    for (int j = 0; j < cols; ++j) y[j] /= z;
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [rows, cols](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (int i = 0; i < rows; ++i) {
        const double* s = o.data.data() + static_cast<size_t>(i) * cols;
        const double* g = o.grad.data() + static_cast<size_t>(i) * cols;
        double dot = 0.0;
        for (int j = 0; j < cols; ++j) dot += s[j] * g[j];
        double* d = dA.data() + static_cast<size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) d[j] += s[j] * (g[j] - dot);
      }
    };
  }
  return out;
}

Tensor LogSoftmax(const Tensor& a) {
  RequireDefined(a, "log_softmax");
  if (a.rank() > 2) {
    throw DimensionError("log_softmax: rank-1 or rank-2 only, got " +
                         ShapeToString(a.shape()));
  }
  const int rows = a.rows(), cols = a.cols();
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < rows; ++i) {
    const double* x = A.data() + static_cast<size_t>(i) * cols;
    double* y = O.data() + static_cast<size_t>(i) * cols;
    double hi = x[0];
    for (int j = 1; j < cols; ++j) hi = std::max(hi, x[j]);
    double z = 0.0;
    for (int j = 0; j < cols; ++j) z += std::exp(x[j] - hi);
    double lz = hi + std::log(z);
    for (int j = 0; j < cols; ++j) y[j] = x[j] - lz;
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [rows, cols](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (int i = 0; i < rows; ++i) {
        const double* y = o.data.data() + static_cast<size_t>(i) * cols;
        const double* g = o.grad.data() + static_cast<size_t>(i) * cols;
        double gsum = 0.0;
        for (int j = 0; j < cols; ++j) gsum += g[j];
        double* d = dA.data() + static_cast<size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) d[j] += g[j] - std::exp(y[j]) * gsum;
      }
    };
  }
  return out;
}

Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 double eps) {
  RequireDefined(x, "layer_norm");
  RequireDefined(gain, "layer_norm");
  RequireDefined(bias, "layer_norm");
  if (x.rank() > 2) {
    throw DimensionError("layer_norm: rank-1 or rank-2 only, got " +
                         ShapeToString(x.shape()));
  }
  const int rows = x.rows(), cols = x.cols();
  if (gain.rank() != 1 || gain.dim(0) != cols || bias.rank() != 1 ||
      bias.dim(0) != cols) {
    throw DimensionError("layer_norm: affine parameters must be rank-1 of " +
                         std::to_string(cols) + ", got gain " +
                         ShapeToString(gain.shape()) + " bias " +
                         ShapeToString(bias.shape()));
  }
  bool track = GradEnabled() && (x.requires_grad() || gain.requires_grad() ||
                                 bias.requires_grad());
  Tensor out = NewTensorNode(x.shape(), track);
  const auto& X = x.data();
  const auto& G = gain.data();
  const auto& B = bias.data();
  auto& O = out.data();
  for (int i = 0; i < rows; ++i) {
    const double* row = X.data() + static_cast<size_t>(i) * cols;
    double* y = O.data() + static_cast<size_t>(i) * cols;
    double mu = 0.0;
    for (int j = 0; j < cols; ++j) mu += row[j];
    mu /= cols;
    double var = 0.0;
    for (int j = 0; j < cols; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= cols;
    double inv = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < cols; ++j) y[j] = (row[j] - mu) * inv * G[j] + B[j];
  }
  if (track) {
    out.node()->parents = {x, gain, bias};
    out.node()->backward_fn = [rows, cols, eps](TensorNode& o) {
      Tensor px = o.parents[0];
      Tensor pg = o.parents[1];
      Tensor pb = o.parents[2];
      const auto& X = px.data();
      const auto& G = pg.data();
      for (int i = 0; i < rows; ++i) {
        const double* row = X.data() + static_cast<size_t>(i) * cols;
        const double* g = o.grad.data() + static_cast<size_t>(i) * cols;
        double mu = 0.0;
        for (int j = 0; j < cols; ++j) mu += row[j];
        mu /= cols;
        double var = 0.0;
        for (int j = 0; j < cols; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= cols;
        double inv = 1.0 / std::sqrt(var + eps);
        // Normalized row and the two row means the gradient needs.
        double mean_dy = 0.0, mean_dyy = 0.0;
        for (int j = 0; j < cols; ++j) {
          double yj = (row[j] - mu) * inv;
          double dy = g[j] * G[j];
          mean_dy += dy;
          mean_dyy += dy * yj;
        }
        mean_dy /= cols;
        mean_dyy /= cols;
        if (px.requires_grad()) {
          auto& dX = px.MutableGrad();
          double* d = dX.data() + static_cast<size_t>(i) * cols;
          for (int j = 0; j < cols; ++j) {
            double yj = (row[j] - mu) * inv;
            double dy = g[j] * G[j];
            d[j] += inv * (dy - mean_dy - yj * mean_dyy);
          }
        }
        if (pg.requires_grad()) {
          auto& dG = pg.MutableGrad();
          for (int j = 0; j < cols; ++j) {
            dG[j] += g[j] * (row[j] - mu) * inv;
          }
        }
        if (pb.requires_grad()) {
          auto& dB = pb.MutableGrad();
          for (int j = 0; j < cols; ++j) dB[j] += g[j];
        }
      }
    };
  }
  return out;
}

Tensor Conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride,
              int pad) {
  RequireDefined(x, "conv1d");
  RequireDefined(w, "conv1d");
  RequireDefined(b, "conv1d");
  if (x.rank() != 2 || w.rank() != 3 || b.rank() != 1 ||
      w.dim(1) != x.dim(1) || b.dim(0) != w.dim(2)) {
    throw DimensionError("conv1d: incompatible shapes x " +
                         ShapeToString(x.shape()) + " w " +
                         ShapeToString(w.shape()) + " b " +
                         ShapeToString(b.shape()));
  }
  CheckContract(stride >= 1 && pad >= 0, "conv1d: bad stride or pad");
  const int T = x.dim(0), cin = x.dim(1);
  const int K = w.dim(0), cout = w.dim(2);
  const int t_out = (T + 2 * pad - K) / stride + 1;
  if (T + 2 * pad < K || t_out < 1) {
    throw DimensionError("conv1d: input of " + std::to_string(T) +
                         " frames too short for kernel " + std::to_string(K));
  }
  bool track = GradEnabled() && (x.requires_grad() || w.requires_grad() ||
                                 b.requires_grad());
  Tensor out = NewTensorNode({t_out, cout}, track);
  {
    const auto& X = x.data();
    const auto& W = w.data();
    const auto& B = b.data();
    auto& O = out.data();
    for (int to = 0; to < t_out; ++to) {
      double* orow = O.data() + static_cast<size_t>(to) * cout;
      for (int co = 0; co < cout; ++co) orow[co] = B[co];
      for (int kk = 0; kk < K; ++kk) {
        int ti = to * stride + kk - pad;
        if (ti < 0 || ti >= T) continue;
        const double* xrow = X.data() + static_cast<size_t>(ti) * cin;
        const double* wk = W.data() + static_cast<size_t>(kk) * cin * cout;
        for (int ci = 0; ci < cin; ++ci) {
          double xv = xrow[ci];
          if (xv == 0.0) continue;
          const double* wrow = wk + static_cast<size_t>(ci) * cout;
          for (int co = 0; co < cout; ++co) orow[co] += xv * wrow[co];
        }
      }
    }
  }
  if (track) {
    out.node()->parents = {x, w, b};
    out.node()->backward_fn = [T, cin, K, cout, stride, pad,
                               t_out](TensorNode& o) {
      Tensor px = o.parents[0];
      Tensor pw = o.parents[1];
      Tensor pb = o.parents[2];
      const auto& X = px.data();
      const auto& W = pw.data();
      for (int to = 0; to < t_out; ++to) {
        const double* g = o.grad.data() + static_cast<size_t>(to) * cout;
        if (pb.requires_grad()) {
          auto& dB = pb.MutableGrad();
          for (int co = 0; co < cout; ++co) dB[co] += g[co];
        }
        for (int kk = 0; kk < K; ++kk) {
          int ti = to * stride + kk - pad;
          if (ti < 0 || ti >= T) continue;
          if (px.requires_grad()) {
            auto& dX = px.MutableGrad();
            double* dxrow = dX.data() + static_cast<size_t>(ti) * cin;
            const double* wk = W.data() + static_cast<size_t>(kk) * cin * cout;
            for (int ci = 0; ci < cin; ++ci) {
              const double* wrow = wk + static_cast<size_t>(ci) * cout;
              double acc = 0.0;
              for (int co = 0; co < cout; ++co) acc += g[co] * wrow[co];
              dxrow[ci] += acc;
            }
          }
          if (pw.requires_grad()) {
            auto& dW = pw.MutableGrad();
            const double* xrow = X.data() + static_cast<size_t>(ti) * cin;
            double* dwk = dW.data() + static_cast<size_t>(kk) * cin * cout;
            for (int ci = 0; ci < cin; ++ci) {
              double xv = xrow[ci];
              if (xv == 0.0) continue;
              double* dwrow = dwk + static_cast<size_t>(ci) * cout;
              for (int co = 0; co < cout; ++co) dwrow[co] += xv * g[co];
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor DepthwiseConv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
  RequireDefined(x, "depthwise_conv1d");
  RequireDefined(w, "depthwise_conv1d");
  RequireDefined(b, "depthwise_conv1d");
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1 ||
      w.dim(1) != x.dim(1) || b.dim(0) != x.dim(1) || w.dim(0) % 2 == 0) {
    throw DimensionError("depthwise_conv1d: incompatible shapes x " +
                         ShapeToString(x.shape()) + " w " +
                         ShapeToString(w.shape()) + " b " +
                         ShapeToString(b.shape()) + " (kernel must be odd)");
  }
  const int T = x.dim(0), c = x.dim(1), K = w.dim(0), pad = (K - 1) / 2;
  bool track = GradEnabled() && (x.requires_grad() || w.requires_grad() ||
                                 b.requires_grad());
  Tensor out = NewTensorNode({T, c}, track);
  {
    const auto& X = x.data();
    const auto& W = w.data();
    const auto& B = b.data();
    auto& O = out.data();
    for (int t = 0; t < T; ++t) {
      double* orow = O.data() + static_cast<size_t>(t) * c;
      for (int j = 0; j < c; ++j) orow[j] = B[j];
      for (int kk = 0; kk < K; ++kk) {
        int ti = t + kk - pad;
        if (ti < 0 || ti >= T) continue;
        const double* xrow = X.data() + static_cast<size_t>(ti) * c;
        const double* wrow = W.data() + static_cast<size_t>(kk) * c;
        for (int j = 0; j < c; ++j) orow[j] += xrow[j] * wrow[j];
      }
    }
  }
  if (track) {
    out.node()->parents = {x, w, b};
    out.node()->backward_fn = [T, c, K, pad](TensorNode& o) {
      Tensor px = o.parents[0];
      Tensor pw = o.parents[1];
      Tensor pb = o.parents[2];
      const auto& X = px.data();
      const auto& W = pw.data();
      for (int t = 0; t < T; ++t) {
        const double* g = o.grad.data() + static_cast<size_t>(t) * c;
        if (pb.requires_grad()) {
          auto& dB = pb.MutableGrad();
          for (int j = 0; j < c; ++j) dB[j] += g[j];
        }
        for (int kk = 0; kk < K; ++kk) {
          int ti = t + kk - pad;
          if (ti < 0 || ti >= T) continue;
          if (px.requires_grad()) {
            auto& dX = px.MutableGrad();
            double* dxrow = dX.data() + static_cast<size_t>(ti) * c;
            const double* wrow = W.data() + static_cast<size_t>(kk) * c;
            for (int j = 0; j < c; ++j) dxrow[j] += g[j] * wrow[j];
          }
          if (pw.requires_grad()) {
            auto& dW = pw.MutableGrad();
            const double* xrow = X.data() + static_cast<size_t>(ti) * c;
            double* dwrow = dW.data() + static_cast<size_t>(kk) * c;
            for (int j = 0; j < c; ++j) dwrow[j] += g[j] * xrow[j];
          }
        }
      }
    };
  }
  return out;
}

Tensor Embedding(const std::vector<int>& ids, const Tensor& table) {
  RequireDefined(table, "embedding");
  if (table.rank() != 2) {
    throw DimensionError("embedding: table must be rank-2, got " +
                         ShapeToString(table.shape()));
  }
  const int n = table.dim(0), d = table.dim(1);
  for (int id : ids) {
    CheckContract(id >= 0 && id < n,
                  "embedding: id " + std::to_string(id) + " out of [0, " +
                      std::to_string(n) + ")");
  }
  const int len = static_cast<int>(ids.size());
  bool track = Track1(table);
  Tensor out = NewTensorNode({len, d}, track);
  {
    const auto& Tb = table.data();
    auto& O = out.data();
    for (int i = 0; i < len; ++i) {
      const double* row = Tb.data() + static_cast<size_t>(ids[i]) * d;
      std::copy(row, row + d, O.data() + static_cast<size_t>(i) * d);
    }
  }
  if (track) {
    out.node()->parents = {table};
    out.node()->backward_fn = [ids, d](TensorNode& o) {
      Tensor pt = o.parents[0];
      auto& dT = pt.MutableGrad();
      for (size_t i = 0; i < ids.size(); ++i) {
        const double* g = o.grad.data() + i * d;
        double* drow = dT.data() + static_cast<size_t>(ids[i]) * d;
        for (int j = 0; j < d; ++j) drow[j] += g[j];
      }
    };
  }
  return out;
}

Tensor Concat(const std::vector<Tensor>& parts, int axis) {
  CheckContract(!parts.empty(), "concat: no parts");
  for (const auto& p : parts) RequireDefined(p, "concat");
  const int rank = parts[0].rank();
  CheckContract(axis == 0 || axis == 1, "concat: axis must be 0 or 1");
  if (rank == 1) {
    CheckContract(axis == 0, "concat: rank-1 tensors concatenate on axis 0");
    int total = 0;
    for (const auto& p : parts) {
      if (p.rank() != 1) {
        throw DimensionError("concat: mixed ranks");
      }
      total += p.dim(0);
    }
    bool track = false;
    for (const auto& p : parts) track = track || Track1(p);
    Tensor out = NewTensorNode({total}, track);
    int at = 0;
    for (const auto& p : parts) {
      std::copy(p.data().begin(), p.data().end(), out.data().begin() + at);
      at += p.dim(0);
    }
    if (track) {
      out.node()->parents = parts;
      out.node()->backward_fn = [](TensorNode& o) {
        size_t at = 0;
        for (auto& parent : o.parents) {
          size_t n = parent.numel();
          if (parent.requires_grad()) {
            auto& dP = parent.MutableGrad();
            for (size_t i = 0; i < n; ++i) dP[i] += o.grad[at + i];
          }
          at += n;
        }
      };
    }
    return out;
  }
  // rank-2
  int rows0 = parts[0].dim(0), cols0 = parts[0].dim(1);
  int rows = axis == 0 ? 0 : rows0;
  int cols = axis == 1 ? 0 : cols0;
  for (const auto& p : parts) {
    if (p.rank() != 2 || (axis == 0 && p.dim(1) != cols0) ||
        (axis == 1 && p.dim(0) != rows0)) {
      throw DimensionError("concat: incompatible part shape " +
                           ShapeToString(p.shape()));
    }
    if (axis == 0) rows += p.dim(0);
    if (axis == 1) cols += p.dim(1);
  }
  bool track = false;
  for (const auto& p : parts) track = track || Track1(p);
  Tensor out = NewTensorNode({rows, cols}, track);
  auto& O = out.data();
  if (axis == 0) {
    size_t at = 0;
    for (const auto& p : parts) {
      std::copy(p.data().begin(), p.data().end(), O.begin() + at);
      at += p.data().size();
    }
  } else {
    int col_at = 0;
    for (const auto& p : parts) {
      const int pc = p.dim(1);
      const auto& P = p.data();
      for (int i = 0; i < rows; ++i) {
        std::copy(P.begin() + static_cast<size_t>(i) * pc,
                  P.begin() + static_cast<size_t>(i + 1) * pc,
                  O.begin() + static_cast<size_t>(i) * cols + col_at);
      }
      col_at += pc;
    }
  }
  if (track) {
    out.node()->parents = parts;
    out.node()->backward_fn = [axis, rows, cols](TensorNode& o) {
      if (axis == 0) {
        size_t at = 0;
        for (auto& parent : o.parents) {
          size_t n = parent.numel();
          if (parent.requires_grad()) {
            auto& dP = parent.MutableGrad();
            for (size_t i = 0; i < n; ++i) dP[i] += o.grad[at + i];
          }
          at += n;
        }
      } else {
        int col_at = 0;
        for (auto& parent : o.parents) {
          const int pc = parent.shape()[1];
          if (parent.requires_grad()) {
            auto& dP = parent.MutableGrad();
            for (int i = 0; i < rows; ++i) {
              for (int j = 0; j < pc; ++j) {
                dP[static_cast<size_t>(i) * pc + j] +=
                    o.grad[static_cast<size_t>(i) * cols + col_at + j];
              }
            }
          }
          col_at += pc;
        }
      }
    };
  }
  return out;
}

Tensor Transpose(const Tensor& a) {
  RequireDefined(a, "transpose");
  if (a.rank() != 2) {
    throw DimensionError("transpose: rank-2 only, got " +
                         ShapeToString(a.shape()));
  }
  const int m = a.dim(0), n = a.dim(1);
  bool track = Track1(a);
  Tensor out = NewTensorNode({n, m}, track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      O[static_cast<size_t>(j) * m + i] = A[static_cast<size_t>(i) * n + j];
    }
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [m, n](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
          dA[static_cast<size_t>(i) * n + j] +=
              o.grad[static_cast<size_t>(j) * m + i];
        }
      }
    };
  }
  return out;
}

Tensor Slice(const Tensor& a, int r0, int r1, int c0, int c1) {
  RequireDefined(a, "slice");
  if (a.rank() != 2) {
    throw DimensionError("slice: rank-2 only, got " +
                         ShapeToString(a.shape()));
  }
  const int m = a.dim(0), n = a.dim(1);
  if (!(0 <= r0 && r0 < r1 && r1 <= m && 0 <= c0 && c0 < c1 && c1 <= n)) {
    throw DimensionError("slice: range [" + std::to_string(r0) + "," +
                         std::to_string(r1) + ")x[" + std::to_string(c0) +
                         "," + std::to_string(c1) + ") out of shape " +
                         ShapeToString(a.shape()));
  }
  const int rows = r1 - r0, cols = c1 - c0;
  bool track = Track1(a);
  Tensor out = NewTensorNode({rows, cols}, track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < rows; ++i) {
    const double* src = A.data() + static_cast<size_t>(r0 + i) * n + c0;
    std::copy(src, src + cols, O.data() + static_cast<size_t>(i) * cols);
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [r0, c0, rows, cols, n](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (int i = 0; i < rows; ++i) {
        const double* g = o.grad.data() + static_cast<size_t>(i) * cols;
        double* d = dA.data() + static_cast<size_t>(r0 + i) * n + c0;
        for (int j = 0; j < cols; ++j) d[j] += g[j];
      }
    };
  }
  return out;
}

Tensor Reshape(const Tensor& a, const Shape& shape) {
  RequireDefined(a, "reshape");
  if (NumElements(shape) != a.numel()) {
    throw DimensionError("reshape: cannot view " + ShapeToString(a.shape()) +
                         " as " + ShapeToString(shape));
  }
  bool track = Track1(a);
  Tensor out = NewTensorNode(shape, track);
  out.data() = a.data();
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      AddInto(pa.MutableGrad(), o.grad);
    };
  }
  return out;
}

Tensor GatherCols(const Tensor& a, const std::vector<int>& cols) {
  RequireDefined(a, "gather_cols");
  if (a.rank() != 2) {
    throw DimensionError("gather_cols: rank-2 only, got " +
                         ShapeToString(a.shape()));
  }
  const int m = a.dim(0), n = a.dim(1);
  for (int c : cols) {
    CheckContract(c >= 0 && c < n, "gather_cols: column " + std::to_string(c) +
                                       " out of [0, " + std::to_string(n) +
                                       ")");
  }
  const int k = static_cast<int>(cols.size());
  bool track = Track1(a);
  Tensor out = NewTensorNode({m, k}, track);
  const auto& A = a.data();
  auto& O = out.data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      O[static_cast<size_t>(i) * k + j] =
          A[static_cast<size_t>(i) * n + cols[j]];
    }
  }
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [cols, n, m](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      const int k = static_cast<int>(cols.size());
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
          dA[static_cast<size_t>(i) * n + cols[j]] +=
              o.grad[static_cast<size_t>(i) * k + j];
        }
      }
    };
  }
  return out;
}

Tensor MaskedFill(const Tensor& a, const std::vector<uint8_t>& mask,
                  double value) {
  RequireDefined(a, "masked_fill");
  if (static_cast<int64_t>(mask.size()) != a.numel()) {
    throw DimensionError("masked_fill: mask of " +
                         std::to_string(mask.size()) +
                         " entries for tensor " + ShapeToString(a.shape()));
  }
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = mask[i] ? value : A[i];
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [mask](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (size_t i = 0; i < dA.size(); ++i) {
        if (!mask[i]) dA[i] += o.grad[i];
      }
    };
  }
  return out;
}

Tensor ReduceSum(const Tensor& a) {
  RequireDefined(a, "reduce_sum");
  bool track = Track1(a);
  Tensor out = NewTensorNode({1}, track);
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  out.data()[0] = acc;
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      double g = o.grad[0];
      for (auto& d : dA) d += g;
    };
  }
  return out;
}

Tensor ReduceMean(const Tensor& a) {
  RequireDefined(a, "reduce_mean");
  CheckContract(a.numel() > 0, "reduce_mean: empty tensor");
  return Scale(ReduceSum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor Dropout(const Tensor& a, double p, Rng* rng) {
  RequireDefined(a, "dropout");
  CheckContract(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  if (rng == nullptr || p == 0.0) return a;
  const double keep = 1.0 - p;
  std::vector<double> mask(a.data().size());
  for (auto& mv : mask) mv = rng->Bernoulli(keep) ? 1.0 / keep : 0.0;
  bool track = Track1(a);
  Tensor out = NewTensorNode(a.shape(), track);
  const auto& A = a.data();
  auto& O = out.data();
  for (size_t i = 0; i < O.size(); ++i) O[i] = A[i] * mask[i];
  if (track) {
    out.node()->parents = {a};
    out.node()->backward_fn = [mask = std::move(mask)](TensorNode& o) {
      Tensor pa = o.parents[0];
      auto& dA = pa.MutableGrad();
      for (size_t i = 0; i < dA.size(); ++i) dA[i] += o.grad[i] * mask[i];
    };
  }
  return out;
}

}  // namespace ops
}  // namespace cassnat
