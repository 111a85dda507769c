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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cassnat/numcore/checkpoint.h"
#include "cassnat/numcore/grad_check.h"
#include "cassnat/numcore/ops.h"
#include "cassnat/numcore/tensor.h"
#include "cassnat/util/io.h"
#include "cassnat/util/parallel.h"
#include "cassnat/util/rng.h"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

using namespace cassnat;

namespace {

Tensor RandomTensor(const Shape& shape, Rng* rng, bool requires_grad,
                    double scale = 1.0) {
  std::vector<double> data(static_cast<size_t>(NumElements(shape)));
  for (auto& v : data) v = scale * rng->Normal();
  return Tensor::FromData(shape, std::move(data), requires_grad);
}

}  // namespace

TEST_CASE("rng: mix produces distinct deterministic streams") {
  CHECK(Rng::Mix(7, 0) == Rng::Mix(7, 0));
  CHECK(Rng::Mix(7, 0) != Rng::Mix(7, 1));
  CHECK(Rng::Mix(7, 0) != Rng::Mix(8, 0));
  Rng a(Rng::Mix(7, 3));
  Rng b(Rng::Mix(7, 3));
  for (int i = 0; i < 16; ++i) CHECK(a.Next() == b.Next());
}

TEST_CASE("rng: uniform int covers inclusive bounds") {
  Rng rng(123);
  std::set<int> seen;
  for (int i = 0; i < 2000; ++i) {
    int v = rng.UniformInt(-2, 3);
    CHECK(v >= -2);
    CHECK(v <= 3);
    seen.insert(v);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("rng: normal moments are sane") {
  Rng rng(99);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = rng.Normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("parallel_for: covers every index once and propagates errors") {
  std::vector<int> hits(1000, 0);
  ParallelFor(1000, 4, [&](int i) { hits[i] += 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
  CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
  CHECK_THROWS_AS(
      ParallelFor(8, 2,
                  [](int i) {
                    if (i == 5) throw ContractError("boom");
                  }),
      ContractError);
}

TEST_CASE("io: round trip of scalar and array primitives") {
  std::stringstream ss;
  WriteU32(ss, 0xDEADBEEFu);
  WriteU64(ss, 0x0123456789ABCDEFull);
  WriteF32(ss, 1.5f);
  WriteF64(ss, -2.25);
  WriteString(ss, "hello");
  WriteF64Array(ss, {1.0, -1.0, 3.5});
  CHECK(ReadU32(ss) == 0xDEADBEEFu);
  CHECK(ReadU64(ss) == 0x0123456789ABCDEFull);
  CHECK(ReadF32(ss) == 1.5f);
  CHECK(ReadF64(ss) == -2.25);
  CHECK(ReadString(ss) == "hello");
  auto arr = ReadF64Array(ss, 3);
  CHECK(arr == std::vector<double>{1.0, -1.0, 3.5});
  CHECK_THROWS_AS(ReadU32(ss), ContractError);  // past the end
}

TEST_CASE("tensor: construction, item and shape checks") {
  Tensor z = Tensor::Zeros({2, 3});
  CHECK(z.numel() == 6);
  CHECK(z.rows() == 2);
  CHECK(z.cols() == 3);
  Tensor s = Tensor::Scalar(4.0);
  CHECK(s.item() == 4.0);
  Tensor v = Tensor::FromData({3}, {1, 2, 3});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 3);
  CHECK_THROWS_AS(Tensor::FromData({2, 2}, {1.0}), DimensionError);
  CHECK_THROWS_AS(z.item(), ContractError);
}

TEST_CASE("ops: matmul forward agrees with a hand computation") {
  Tensor a = Tensor::FromData({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = Tensor::FromData({3, 2}, {7, 8, 9, 10, 11, 12});
  Tensor c = ops::MatMul(a, b);
  CHECK(c.at2(0, 0) == doctest::Approx(58));
  CHECK(c.at2(0, 1) == doctest::Approx(64));
  CHECK(c.at2(1, 0) == doctest::Approx(139));
  CHECK(c.at2(1, 1) == doctest::Approx(154));
  CHECK_THROWS_AS(ops::MatMul(a, a), DimensionError);
}

TEST_CASE("ops: backward through a small expression matches hand gradients") {
  // f = sum((a @ b) * s) with s constant.
  Tensor a = Tensor::FromData({1, 2}, {2, 3}, /*requires_grad=*/true);
  Tensor b = Tensor::FromData({2, 1}, {5, 7}, /*requires_grad=*/true);
  Tensor f = ops::ReduceSum(ops::Scale(ops::MatMul(a, b), 2.0));
  CHECK(f.item() == doctest::Approx(2 * (2 * 5 + 3 * 7)));
  Backward(f);
  CHECK(a.grad()[0] == doctest::Approx(10));
  CHECK(a.grad()[1] == doctest::Approx(14));
  CHECK(b.grad()[0] == doctest::Approx(4));
  CHECK(b.grad()[1] == doctest::Approx(6));
}

TEST_CASE("ops: grad reuse across two backward calls accumulates") {
  Tensor a = Tensor::FromData({2}, {1, 2}, true);
  Tensor f1 = ops::ReduceSum(a);
  Backward(f1);
  Tensor f2 = ops::ReduceSum(ops::Scale(a, 3.0));
  Backward(f2);
  CHECK(a.grad()[0] == doctest::Approx(4.0));
  CHECK(a.grad()[1] == doctest::Approx(4.0));
  CHECK_THROWS_AS(Backward(f1), ContractError);  // same graph twice
}

TEST_CASE("ops: finite differences across every primitive") {
  Rng rng(2024);
  // Each entry builds a scalar from a list of tracked parameters.
  struct Case {
    const char* name;
    std::vector<Tensor> params;
    std::function<Tensor()> fn;
  };
  std::vector<Case> cases;

  {
    Tensor a = RandomTensor({3, 4}, &rng, true);
    Tensor b = RandomTensor({4, 2}, &rng, true);
    cases.push_back({"matmul", {a, b}, [a, b]() {
                       return ops::ReduceSum(ops::MatMul(a, b));
                     }});
  }
  {
    Tensor a = RandomTensor({2, 3}, &rng, true);
    Tensor b = RandomTensor({2, 3}, &rng, true);
    cases.push_back({"add_mul_same", {a, b}, [a, b]() {
                       return ops::ReduceSum(ops::Mul(ops::Add(a, b), b));
                     }});
  }
  {
    Tensor a = RandomTensor({3, 4}, &rng, true);
    Tensor b = RandomTensor({4}, &rng, true);
    cases.push_back({"add_mul_row_broadcast", {a, b}, [a, b]() {
                       return ops::ReduceSum(ops::Mul(ops::Add(a, b), b));
                     }});
  }
  {
    Tensor a = RandomTensor({2, 5}, &rng, true);
    cases.push_back({"sub_scale_exp", {a}, [a]() {
                       return ops::ReduceSum(
                           ops::Exp(ops::Scale(ops::Sub(a, a), 0.5)));
                     }});
  }
  {
    Tensor a = RandomTensor({6}, &rng, true, 0.5);
    cases.push_back({"log_of_exp", {a}, [a]() {
                       return ops::ReduceSum(ops::Log(ops::Exp(a)));
                     }});
  }
  {
    Tensor a = RandomTensor({2, 4}, &rng, true);
    Tensor b = RandomTensor({2, 4}, &rng, true);
    cases.push_back({"logaddexp", {a, b}, [a, b]() {
                       return ops::ReduceSum(ops::LogAddExp(a, b));
                     }});
  }
  {
    Tensor a = RandomTensor({3, 3}, &rng, true);
    cases.push_back({"sigmoid", {a}, [a]() {
                       return ops::ReduceSum(ops::Sigmoid(a));
                     }});
  }
  {
    // Keep relu inputs away from the kink.
    Tensor a = RandomTensor({3, 3}, &rng, true);
    for (auto& v : a.data()) {
      if (std::abs(v) < 0.1) v = 0.5;
    }
    cases.push_back(
        {"relu", {a}, [a]() { return ops::ReduceSum(ops::Relu(a)); }});
  }
  {
    Tensor a = RandomTensor({3, 3}, &rng, true);
    cases.push_back(
        {"swish", {a}, [a]() { return ops::ReduceSum(ops::Swish(a)); }});
  }
  {
    Tensor a = RandomTensor({3, 6}, &rng, true);
    cases.push_back(
        {"glu", {a}, [a]() { return ops::ReduceSum(ops::Glu(a)); }});
  }
  {
    Tensor a = RandomTensor({3, 5}, &rng, true);
    Tensor w = RandomTensor({3, 5}, &rng, false);
    cases.push_back({"softmax", {a}, [a, w]() {
                       return ops::ReduceSum(ops::Mul(ops::Softmax(a), w));
                     }});
  }
  {
    Tensor a = RandomTensor({3, 5}, &rng, true);
    Tensor w = RandomTensor({3, 5}, &rng, false);
    cases.push_back({"log_softmax", {a}, [a, w]() {
                       return ops::ReduceSum(ops::Mul(ops::LogSoftmax(a), w));
                     }});
  }
  {
    Tensor x = RandomTensor({4, 6}, &rng, true);
    Tensor g = RandomTensor({6}, &rng, true, 0.3);
    Tensor b = RandomTensor({6}, &rng, true, 0.3);
    Tensor w = RandomTensor({4, 6}, &rng, false);
    cases.push_back({"layer_norm", {x, g, b}, [x, g, b, w]() {
                       return ops::ReduceSum(
                           ops::Mul(ops::LayerNorm(x, g, b), w));
                     }});
  }
  {
    Tensor x = RandomTensor({7, 3}, &rng, true);
    Tensor w = RandomTensor({3, 3, 4}, &rng, true, 0.5);
    Tensor b = RandomTensor({4}, &rng, true, 0.5);
    cases.push_back({"conv1d_stride2_pad1", {x, w, b}, [x, w, b]() {
                       return ops::ReduceSum(ops::Conv1d(x, w, b, 2, 1));
                     }});
  }
  {
    Tensor x = RandomTensor({6, 4}, &rng, true);
    Tensor w = RandomTensor({5, 4}, &rng, true, 0.5);
    Tensor b = RandomTensor({4}, &rng, true, 0.5);
    cases.push_back({"depthwise_conv1d", {x, w, b}, [x, w, b]() {
                       return ops::ReduceSum(ops::DepthwiseConv1d(x, w, b));
                     }});
  }
  {
    Tensor table = RandomTensor({5, 3}, &rng, true);
    std::vector<int> ids = {4, 0, 4, 2};  // duplicate rows accumulate
    cases.push_back({"embedding", {table}, [table, ids]() {
                       return ops::ReduceSum(ops::Embedding(ids, table));
                     }});
  }
  {
    Tensor a = RandomTensor({2, 3}, &rng, true);
    Tensor b = RandomTensor({4, 3}, &rng, true);
    Tensor c = RandomTensor({2, 2}, &rng, true);
    cases.push_back({"concat_axis0_axis1", {a, b, c}, [a, b, c]() {
                       Tensor rows = ops::Concat({a, ops::Slice(b, 0, 2, 0, 3)},
                                                 0);  // [4,3]
                       Tensor wide =
                           ops::Concat({ops::Slice(rows, 0, 2, 0, 3), c}, 1);
                       return ops::ReduceSum(ops::Mul(wide, wide));
                     }});
  }
  {
    Tensor a = RandomTensor({3, 4}, &rng, true);
    cases.push_back({"transpose_reshape", {a}, [a]() {
                       Tensor t = ops::Transpose(a);
                       return ops::ReduceSum(
                           ops::Mul(ops::Reshape(t, {3, 4}), a));
                     }});
  }
  {
    Tensor a = RandomTensor({4, 6}, &rng, true);
    std::vector<int> cols = {5, 0, 5, 3};
    cases.push_back({"gather_cols", {a}, [a, cols]() {
                       return ops::ReduceSum(ops::GatherCols(a, cols));
                     }});
  }
  {
    Tensor a = RandomTensor({3, 3}, &rng, true);
    std::vector<uint8_t> mask = {0, 1, 0, 1, 0, 1, 0, 0, 1};
    cases.push_back({"masked_fill", {a}, [a, mask]() {
                       return ops::ReduceSum(
                           ops::Mul(ops::MaskedFill(a, mask, -5.0),
                                    ops::MaskedFill(a, mask, 2.0)));
                     }});
  }
  {
    Tensor a = RandomTensor({4, 4}, &rng, true);
    cases.push_back({"reduce_mean", {a}, [a]() {
                       return ops::ReduceMean(ops::Mul(a, a));
                     }});
  }

  for (auto& c : cases) {
    CAPTURE(c.name);
    GradCheckResult r = CheckGradients(c.fn, c.params);
    INFO(c.name << " worst param " << r.worst_param << " coord "
                << r.worst_coord);
    CHECK(r.max_rel_error < 1e-7);
  }
}

TEST_CASE("ops: softmax rows sum to one and masked entries vanish") {
  Rng rng(5);
  Tensor a = RandomTensor({4, 6}, &rng, false, 3.0);
  std::vector<uint8_t> mask(24, 0);
  for (int i = 0; i < 4; ++i) mask[static_cast<size_t>(i) * 6 + 5] = 1;
  Tensor sm = ops::Softmax(ops::MaskedFill(a, mask, -1e9));
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int j = 0; j < 6; ++j) row += sm.at2(i, j);
    CHECK(std::abs(row - 1.0) <= 1e-9);
    CHECK(sm.at2(i, 5) <= 1e-30);
  }
}

TEST_CASE("ops: layer norm handles a zero-variance row") {
  Tensor x = Tensor::FromData({2, 3}, {5, 5, 5, 1, 2, 3});
  Tensor g = Tensor::FromData({3}, {1, 1, 1});
  Tensor b = Tensor::FromData({3}, {0.5, 0.5, 0.5});
  Tensor y = ops::LayerNorm(x, g, b);
  for (int j = 0; j < 3; ++j) CHECK(y.at2(0, j) == doctest::Approx(0.5));
}

TEST_CASE("ops: dropout scales kept entries and is identity at p=0") {
  Tensor a = Tensor::Full({100, 10}, 1.0);
  CHECK(ops::Dropout(a, 0.0, nullptr).node() == a.node());
  Rng rng(7);
  Tensor d = ops::Dropout(a, 0.5, &rng);
  int kept = 0;
  for (double v : d.data()) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0)));
    if (v != 0.0) ++kept;
  }
  CHECK(kept > 400);
  CHECK(kept < 600);
}

TEST_CASE("ops: no-grad guard suppresses graph recording") {
  Tensor a = Tensor::FromData({2}, {1, 2}, true);
  NoGradGuard ng;
  Tensor f = ops::ReduceSum(a);
  CHECK(f.node()->parents.empty());
  CHECK_FALSE(f.requires_grad());
}

TEST_CASE("checkpoint: save/load round trip in both precisions") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cassnat_ckpt_test";
  fs::create_directories(dir);
  std::string path = (dir / "a.ckpt").string();

  std::vector<CheckpointEntry> entries(2);
  entries[0].name = "w";
  entries[0].dtype = kDtypeF64;
  entries[0].shape = {2, 2};
  entries[0].values = {1.25, -2.5, 3.0, 0.0625};
  entries[1].name = "b";
  entries[1].dtype = kDtypeF32;
  entries[1].shape = {3};
  entries[1].values = {0.5, -0.25, 8.0};  // exactly representable in f32
  SaveCheckpoint(path, entries);

  auto loaded = LoadCheckpoint(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].name == "w");
  CHECK(loaded[0].dtype == kDtypeF64);
  CHECK(loaded[0].shape == Shape{2, 2});
  CHECK(loaded[0].values == entries[0].values);
  CHECK(loaded[1].dtype == kDtypeF32);
  CHECK(loaded[1].values == entries[1].values);

  CHECK_THROWS_AS(LoadCheckpoint((dir / "missing.ckpt").string()),
                  MissingInputError);

  // Unknown version must be rejected.
  {
    std::ofstream os(path, std::ios::binary);
    os.write("CASS", 4);
    WriteU32(os, 999);
    WriteU32(os, 0);
  }
  CHECK_THROWS_AS(LoadCheckpoint(path), ContractError);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint: averaging is the elementwise mean") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cassnat_avg_test";
  fs::create_directories(dir);
  auto mk = [&](const std::string& leaf, double v) {
    CheckpointEntry e;
    e.name = "w";
    e.shape = {2};
    e.values = {v, 2 * v};
    std::string p = (dir / leaf).string();
    SaveCheckpoint(p, {e});
    return p;
  };
  std::vector<std::string> paths = {mk("1.ckpt", 1.0), mk("2.ckpt", 2.0),
                                    mk("3.ckpt", 6.0)};
  std::string out = (dir / "avg.ckpt").string();
  AverageCheckpoints(paths, out);
  auto avg = LoadCheckpoint(out);
  REQUIRE(avg.size() == 1);
  CHECK(avg[0].values[0] == doctest::Approx(3.0));
  CHECK(avg[0].values[1] == doctest::Approx(6.0));
  fs::remove_all(dir);
}
