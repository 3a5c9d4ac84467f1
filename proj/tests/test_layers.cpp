// Copyright 2026 The a2asr Authors
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

#include <cmath>

#include <doctest.h>

#include "a2/error.hpp"
#include "a2/gradcheck.hpp"
#include "a2/layers.hpp"
#include "test_util.hpp"

using namespace a2;
using test::RandomTensor;

namespace {

Tensor Identity(int64_t n) {
  std::vector<double> d(static_cast<size_t>(n * n), 0.0);
  for (int64_t i = 0; i < n; ++i) d[static_cast<size_t>(i * n + i)] = 1.0;
  return Tensor::FromData({n, n}, std::move(d));
}

MultiHeadAttention IdentityMha(int64_t d, int heads, Rng& rng) {
  MultiHeadAttention mha = MultiHeadAttention::Init(d, heads, rng);
  mha.wq.w = Identity(d).WithGrad();
  mha.wk.w = Identity(d).WithGrad();
  mha.wv.w = Identity(d).WithGrad();
  mha.wo.w = Identity(d).WithGrad();
  return mha;
}

}  // namespace

TEST_CASE("attention over a single key returns the value row") {
  Rng rng(1);
  MultiHeadAttention mha = IdentityMha(4, 1, rng);
  Tensor q = RandomTensor({3, 4}, rng, 5.0);  // arbitrary scores
  Tensor kv = RandomTensor({1, 4}, rng);
  Tensor out = mha.Forward(q, kv, kv);
  for (int64_t i = 0; i < 3; ++i) {
    for (int64_t j = 0; j < 4; ++j) {
      CHECK(out.At(i, j) == doctest::Approx(kv.At(0, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("causal mask restricts position 0 to itself") {
  Rng rng(2);
  MultiHeadAttention mha = IdentityMha(4, 1, rng);
  Tensor x = RandomTensor({3, 4}, rng);
  Tensor mask = CausalMask(3);
  CHECK(mask.At(0, 1) == 0.0);
  CHECK(mask.At(2, 1) == 1.0);
  Tensor out = mha.Forward(x, x, x, &mask);
  for (int64_t j = 0; j < 4; ++j) {
    CHECK(out.At(0, j) == doctest::Approx(x.At(0, j)).epsilon(1e-12));
  }
}

TEST_CASE("two-head attention matches per-head brute force") {
  Rng rng(3);
  int64_t d = 6;
  int heads = 2;
  int64_t dk = d / heads;
  MultiHeadAttention mha = MultiHeadAttention::Init(d, heads, rng);
  Tensor q = RandomTensor({4, d}, rng);
  Tensor kv = RandomTensor({5, d}, rng);
  Tensor out = mha.Forward(q, kv, kv);

  // Recompute head by head with explicitly sliced projections.
  Tensor qp = MatMul(q, mha.wq.w);
  Tensor kp = MatMul(kv, mha.wk.w);
  Tensor vp = MatMul(kv, mha.wv.w);
  std::vector<Tensor> heads_out;
  for (int h = 0; h < heads; ++h) {
    Tensor qh = SliceCols(qp, h * dk, (h + 1) * dk);
    Tensor kh = SliceCols(kp, h * dk, (h + 1) * dk);
    Tensor vh = SliceCols(vp, h * dk, (h + 1) * dk);
    Tensor scores = Scale(MatMul(qh, Transpose(kh)), 1.0 / std::sqrt(double(dk)));
    heads_out.push_back(MatMul(Softmax(scores), vh));
  }
  Tensor expected = MatMul(ConcatCols(heads_out), mha.wo.w);
  CHECK(test::MaxAbsDiff(out, expected) < 1e-12);
}

TEST_CASE("uniform scores average the unmasked value rows") {
  Rng rng(4);
  int64_t d = 4;
  MultiHeadAttention mha = IdentityMha(d, 1, rng);
  mha.wq.w = Tensor::Zeros({d, d}).WithGrad();  // all scores zero -> uniform
  Tensor v = RandomTensor({5, d}, rng);
  Tensor out = mha.Forward(v, v, v);
  for (int64_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (int64_t i = 0; i < 5; ++i) mean += v.At(i, j);
    mean /= 5.0;
    CHECK(std::fabs(out.At(0, j) - mean) < 1e-10);
  }
}

TEST_CASE("fully masked query row yields a zero output vector") {
  Rng rng(5);
  MultiHeadAttention mha = MultiHeadAttention::Init(4, 2, rng);
  Tensor x = RandomTensor({2, 4}, rng);
  Tensor mask = Tensor::FromData({2, 2}, {0, 0, 1, 1});  // row 0 sees nothing
  Tensor out = mha.Forward(x, x, x, &mask);
  for (int64_t j = 0; j < 4; ++j) CHECK(out.At(0, j) == 0.0);
}

TEST_CASE("attention gradients pass finite differences") {
  Rng rng(6);
  MultiHeadAttention mha = MultiHeadAttention::Init(4, 2, rng);
  Tensor kv = RandomTensor({3, 4}, rng);
  Tensor mask = CausalMask(3);
  double err = GradCheck(
      [&](const Tensor& x) { return Sum(Mul(mha.Forward(x, kv, kv, &mask), kv)); },
      RandomTensor({3, 4}, rng));
  CHECK(err < 1e-5);
}

TEST_CASE("positional encoding values") {
  Tensor pe = PositionalEncoding(8, 8);
  // Position 0: sin(0)=0, cos(0)=1, interleaved.
  for (int64_t i = 0; i < 8; i += 2) {
    CHECK(pe.At(0, i) == 0.0);
    CHECK(pe.At(0, i + 1) == 1.0);
  }
  for (double v : pe.data()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  // PE(t)[2i] = sin(t / 10000^(2i/d)) at t=3, i=1, d=8.
  CHECK(pe.At(3, 2) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 8.0))));
  CHECK_THROWS_AS(PositionalEncoding(0, 4), DimensionError);
}

TEST_CASE("frontend length contract") {
  Rng rng(7);
  FrontEnd fe = FrontEnd::Init(3, 2, 6, rng);
  CHECK(fe.Forward(RandomTensor({4, 3}, rng)).dim(0) == 2);
  CHECK(fe.Forward(RandomTensor({5, 3}, rng)).dim(0) == 3);  // tail zero-padded

  // Zero input: every output row equals the projection bias.
  fe.proj.b = RandomTensor({6}, rng).WithGrad();
  Tensor out = fe.Forward(Tensor::Zeros({4, 3}));
  for (int64_t i = 0; i < 2; ++i) {
    for (int64_t j = 0; j < 6; ++j) {
      CHECK(out.At(i, j) == doctest::Approx(fe.proj.b.At(j)));
    }
  }

  CHECK_THROWS_AS(fe.Forward(RandomTensor({4, 5}, rng)), DimensionError);
}

TEST_CASE("frontend determinism") {
  Rng rng(8);
  FrontEnd fe = FrontEnd::Init(4, 2, 8, rng);
  Tensor x = RandomTensor({7, 4}, rng);
  Tensor a = fe.Forward(x);
  Tensor b = fe.Forward(x);
  CHECK(a.data() == b.data());
}

TEST_CASE("encoder and decoder layer gradients") {
  Rng rng(9);
  EncoderLayer enc = EncoderLayer::Init(4, 2, 8, rng);
  double err = GradCheck(
      [&](const Tensor& x) { return Sum(Mul(enc.Forward(x, nullptr), x)); },
      RandomTensor({3, 4}, rng));
  CHECK(err < 1e-5);

  DecoderLayer dec = DecoderLayer::Init(4, 2, 8, rng);
  Tensor memory = RandomTensor({5, 4}, rng);
  Tensor causal = CausalMask(3);
  double err2 = GradCheck(
      [&](const Tensor& x) {
        return Sum(Mul(dec.Forward(x, memory, causal, nullptr), x));
      },
      RandomTensor({3, 4}, rng));
  CHECK(err2 < 1e-5);
}
