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
#include <limits>

#include <doctest.h>

#include "a2/error.hpp"
#include "a2/gradcheck.hpp"
#include "a2/ops.hpp"
#include "a2/rng.hpp"
#include "a2/tensor.hpp"
#include "test_util.hpp"

using namespace a2;
using test::RandomTensor;

TEST_CASE("matmul identity and shapes") {
  Tensor eye = Tensor::FromData({2, 2}, {1, 0, 0, 1});
  Tensor a = Tensor::FromData({2, 2}, {1, 2, 3, 4});
  Tensor c = MatMul(eye, a);
  CHECK(c.data() == a.data());

  Tensor bad = Tensor::Zeros({3, 2});
  CHECK_THROWS_AS(MatMul(a, bad), DimensionError);
  try {
    MatMul(a, bad);
  } catch (const DimensionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x2]") != std::string::npos);
    CHECK(msg.find("[3x2]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient of sum is consistent") {
  Tensor a = Tensor::FromData({2, 2}, {1, 0, 0, 1}).WithGrad();
  Tensor b = Tensor::FromData({2, 2}, {2, 3, 4, 5}).WithGrad();
  GradTape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = Sum(MatMul(a, b));
  }
  tape.Backward(loss);
  // dA = ones * B^T, dB = A^T * ones; with A = I, dB is all-ones.
  auto gb = tape.Grad(b);
  REQUIRE(gb.has_value());
  for (double v : gb->data()) CHECK(v == doctest::Approx(1.0));
  auto ga = tape.Grad(a);
  REQUIRE(ga.has_value());
  CHECK(ga->At(0, 0) == doctest::Approx(5.0));  // row sums of B
  CHECK(ga->At(1, 1) == doctest::Approx(9.0));
}

TEST_CASE("matmul finite-difference gradient") {
  Rng rng(11);
  Tensor a = RandomTensor({3, 4}, rng);
  Tensor b = RandomTensor({4, 2}, rng);
  double err_a = GradCheck([&](const Tensor& x) { return Sum(MatMul(x, b)); }, a, 1e-5);
  CHECK(err_a < 1e-6);
  double err_b = GradCheck([&](const Tensor& x) { return Sum(MatMul(a, x)); }, b, 1e-5);
  CHECK(err_b < 1e-6);
}

TEST_CASE("softmax basics") {
  Tensor z = Softmax(Tensor::FromData({2}, {0, 0}));
  CHECK(z.At(0) == doctest::Approx(0.5));
  CHECK(z.At(1) == doctest::Approx(0.5));

  // Shift invariance.
  Tensor x = Tensor::FromData({3}, {0.3, -1.2, 2.0});
  Tensor shifted = AddScalar(x, 7.5);
  CHECK(test::MaxAbsDiff(Softmax(x), Softmax(shifted)) < 1e-12);

  // Hand oracle exp/sum for [1,2,3].
  Tensor p = Softmax(Tensor::FromData({3}, {1, 2, 3}));
  CHECK(p.At(0) == doctest::Approx(0.090031).epsilon(1e-4));
  CHECK(p.At(1) == doctest::Approx(0.244728).epsilon(1e-4));
  CHECK(p.At(2) == doctest::Approx(0.665241).epsilon(1e-4));

  Tensor nan_in = Tensor::FromData({2}, {std::numeric_limits<double>::quiet_NaN(), 0.0});
  CHECK_THROWS_AS(Softmax(nan_in), NumericError);
}

TEST_CASE("softmax is a probability vector and matches log_softmax") {
  Rng rng(3);
  for (int seed = 0; seed < 10; ++seed) {
    Tensor x = RandomTensor({4, 5}, rng, 3.0);
    Tensor p = Softmax(x);
    Tensor lp = LogSoftmax(x);
    for (int64_t r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (int64_t c = 0; c < 5; ++c) {
        double v = p.At(r, c);
        CHECK(v >= 0.0);
        sum += v;
        CHECK(std::fabs(std::log(v) - lp.At(r, c)) < 1e-12);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("softmax along axis 0") {
  Tensor x = Tensor::FromData({2, 2}, {0, 10, 0, 10});
  Tensor p = Softmax(x, 0);
  CHECK(p.At(0, 0) == doctest::Approx(0.5));
  CHECK(p.At(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("layernorm edge cases") {
  Tensor gamma = Tensor::Full({4}, 1.0);
  Tensor beta = Tensor::Zeros({4});
  Tensor constant = Tensor::Full({4}, 3.25);
  Tensor y = LayerNorm(constant, gamma, beta);
  for (double v : y.data()) CHECK(std::fabs(v) < 1e-9);

  Tensor beta2 = Tensor::FromData({4}, {1, 2, 3, 4});
  Tensor zerog = Tensor::Zeros({4});
  Rng rng(5);
  Tensor x = RandomTensor({2, 4}, rng);
  Tensor y2 = LayerNorm(x, zerog, beta2);
  CHECK(y2.At(0, 2) == doctest::Approx(3.0));
  CHECK(y2.At(1, 3) == doctest::Approx(4.0));
}

TEST_CASE("layernorm finite-difference gradient") {
  Rng rng(17);
  Tensor x = RandomTensor({2, 4}, rng);
  Tensor gamma = RandomTensor({4}, rng);
  Tensor beta = RandomTensor({4}, rng);
  double ex = GradCheck([&](const Tensor& t) { return Sum(LayerNorm(t, gamma, beta)); }, x);
  CHECK(ex < 1e-5);
  double eg = GradCheck(
      [&](const Tensor& t) { return Sum(Mul(LayerNorm(x, t, beta), LayerNorm(x, t, beta))); },
      gamma);
  CHECK(eg < 1e-5);
}

TEST_CASE("backward basics") {
  Rng rng(7);
  Tensor x = RandomTensor({3, 2}, rng).WithGrad();

  GradTape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    loss = Sum(x);
  }
  tape.Backward(loss);
  auto g = tape.Grad(x);
  REQUIRE(g.has_value());
  CHECK(g->shape() == x.shape());
  for (double v : g->data()) CHECK(v == doctest::Approx(1.0));

  GradTape tape2;
  Tensor loss2;
  {
    TapeScope scope(tape2);
    loss2 = Sum(Mul(x, x));
  }
  tape2.Backward(loss2);
  auto g2 = tape2.Grad(x);
  REQUIRE(g2.has_value());
  for (size_t i = 0; i < g2->data().size(); ++i) {
    CHECK(g2->data()[i] == doctest::Approx(2.0 * x.data()[i]));
  }
}

TEST_CASE("backward rejects non-scalar root") {
  Tensor x = Tensor::Zeros({2, 2}).WithGrad();
  GradTape tape;
  Tensor y;
  {
    TapeScope scope(tape);
    y = Relu(x);
  }
  CHECK_THROWS_AS(tape.Backward(y), ContractError);
}

TEST_CASE("unreachable parameters have no gradient") {
  Tensor x = Tensor::Full({2}, 1.0).WithGrad();
  Tensor unused = Tensor::Full({2}, 2.0).WithGrad();
  GradTape tape;
  Tensor loss;
  {
    TapeScope scope(tape);
    Tensor touched = Relu(unused);  // recorded but not connected to the root
    loss = Sum(x);
    (void)touched;
  }
  tape.Backward(loss);
  CHECK(tape.Grad(x).has_value());
  CHECK_FALSE(tape.Grad(unused).has_value());
}

TEST_CASE("tensors without grad never allocate tape nodes") {
  Tensor a = Tensor::Full({2, 2}, 1.0);
  Tensor b = Tensor::Full({2, 2}, 2.0);
  GradTape tape;
  {
    TapeScope scope(tape);
    Tensor c = Add(MatMul(a, b), b);
    (void)c;
  }
  CHECK(tape.NumNodes() == 0);
}

TEST_CASE("two-layer composition matches finite differences") {
  Rng rng(23);
  Tensor w1 = RandomTensor({4, 3}, rng);
  Tensor w2 = RandomTensor({3, 2}, rng);
  auto f = [&](const Tensor& x) { return Sum(MatMul(Relu(MatMul(x, w1)), w2)); };
  Tensor x = RandomTensor({2, 4}, rng);
  CHECK(GradCheck(f, x, 1e-5) < 1e-5);
}

TEST_CASE("backward is deterministic") {
  Rng rng(31);
  Tensor x = RandomTensor({4, 4}, rng).WithGrad();
  Tensor w = RandomTensor({4, 4}, rng).WithGrad();
  std::vector<double> first;
  for (int round = 0; round < 2; ++round) {
    GradTape tape;
    Tensor loss;
    {
      TapeScope scope(tape);
      loss = Sum(Mul(Softmax(MatMul(x, w)), MatMul(x, w)));
    }
    tape.Backward(loss);
    auto g = tape.Grad(w);
    REQUIRE(g.has_value());
    if (round == 0) {
      first = g->data();
    } else {
      CHECK(g->data() == first);  // bit-identical
    }
  }
}

TEST_CASE("grad_check on simple functionals") {
  Rng rng(41);
  Tensor x = RandomTensor({5}, rng);
  CHECK(GradCheck([](const Tensor& t) { return Sum(t); }, x) < 1e-10);
  CHECK(GradCheck([](const Tensor& t) { return Sum(SliceRows(Reshape(LogSoftmax(t), {1, 5}), 0, 1)); },
                  x) < 1e-6);
}

TEST_CASE("every differentiable op passes grad_check on 10 seeds") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    Tensor a = RandomTensor({3, 4}, rng);
    Tensor b = RandomTensor({3, 4}, rng);
    Tensor m = RandomTensor({4, 3}, rng);
    Tensor v = RandomTensor({4}, rng);
    Tensor gamma = RandomTensor({4}, rng);
    Tensor beta = RandomTensor({4}, rng);
    std::vector<int> ids = {0, 2, 1};

    auto check = [&](const char* name, std::function<Tensor(const Tensor&)> f,
                     const Tensor& x) {
      double err = GradCheck(f, x, 1e-5);
      INFO(name, " seed=", seed, " err=", err);
      CHECK(err < 1e-5);
    };

    check("add", [&](const Tensor& x) { return Sum(Mul(Add(x, b), b)); }, a);
    check("sub", [&](const Tensor& x) { return Sum(Mul(Sub(b, x), b)); }, a);
    check("mul", [&](const Tensor& x) { return Sum(Mul(x, b)); }, a);
    check("scale", [&](const Tensor& x) { return Sum(Scale(x, -1.7)); }, a);
    check("matmul", [&](const Tensor& x) { return Sum(Mul(MatMul(x, m), MatMul(x, m))); }, a);
    check("transpose", [&](const Tensor& x) { return Sum(Mul(Transpose(x), Transpose(x))); }, a);
    check("relu", [&](const Tensor& x) { return Sum(Relu(x)); }, a);
    check("softmax", [&](const Tensor& x) { return Sum(Mul(Softmax(x), b)); }, a);
    check("log_softmax", [&](const Tensor& x) { return Sum(Mul(LogSoftmax(x), b)); }, a);
    check("layernorm", [&](const Tensor& x) { return Sum(Mul(LayerNorm(x, gamma, beta), b)); }, a);
    check("mean", [&](const Tensor& x) { return Mean(Mul(x, x)); }, a);
    check("reshape", [&](const Tensor& x) { return Sum(Mul(Reshape(x, {4, 3}), m)); }, a);
    check("slice_rows", [&](const Tensor& x) { return Sum(Mul(SliceRows(x, 1, 3), SliceRows(b, 1, 3))); }, a);
    check("slice_cols", [&](const Tensor& x) { return Sum(Mul(SliceCols(x, 1, 3), SliceCols(b, 1, 3))); }, a);
    check("concat_cols", [&](const Tensor& x) {
      return Sum(Mul(ConcatCols({SliceCols(x, 0, 2), SliceCols(x, 2, 4)}), b));
    }, a);
    check("pad_rows", [&](const Tensor& x) { return Sum(Mul(PadRows(x, 5), PadRows(b, 5))); }, a);
    check("add_row_broadcast", [&](const Tensor& x) { return Sum(Mul(AddRowBroadcast(x, v), b)); }, a);
    check("embedding_lookup", [&](const Tensor& x) {
      return Sum(Mul(EmbeddingLookup(x, ids), EmbeddingLookup(b, ids)));
    }, a);
    check("add_scalar", [&](const Tensor& x) { return Sum(Mul(AddScalar(x, 0.3), b)); }, a);
  }
}
