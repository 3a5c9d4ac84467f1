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

#ifndef A2_OPS_HPP_
#define A2_OPS_HPP_

#include <span>
#include <vector>

#include "a2/tensor.hpp"

namespace a2 {

// Elementwise; shapes must match exactly.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);

Tensor Scale(const Tensor& a, double c);
Tensor AddScalar(const Tensor& a, double c);

// [m x k] * [k x n] -> [m x n].
Tensor MatMul(const Tensor& a, const Tensor& b);
Tensor Transpose(const Tensor& a);

// Subgradient at 0 is 0.
Tensor Relu(const Tensor& a);

// Stable (max-subtracted) softmax along `axis` of a rank-1/2 tensor.
// Rejects NaN input.
Tensor Softmax(const Tensor& a, int axis = -1);
Tensor LogSoftmax(const Tensor& a, int axis = -1);

// Normalizes the last axis to zero mean / unit variance, then gamma*x + beta.
Tensor LayerNorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 double eps = 1e-5);

Tensor Sum(const Tensor& a);
Tensor Mean(const Tensor& a);

Tensor Reshape(const Tensor& a, std::vector<int64_t> shape);

// Row/column windows of a rank-2 tensor; [r0, r1) and [c0, c1).
Tensor SliceRows(const Tensor& a, int64_t r0, int64_t r1);
Tensor SliceCols(const Tensor& a, int64_t c0, int64_t c1);
Tensor ConcatCols(const std::vector<Tensor>& parts);

// Appends zero rows until the tensor has `rows` rows.
Tensor PadRows(const Tensor& a, int64_t rows);

// [T x d] + broadcast [d].
Tensor AddRowBroadcast(const Tensor& m, const Tensor& v);

// Gathers rows of `table` ([V x d]) at `ids`; backward scatter-adds.
Tensor EmbeddingLookup(const Tensor& table, std::span<const int> ids);

}  // namespace a2

#endif  // A2_OPS_HPP_
