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

#ifndef A2_LAYERS_HPP_
#define A2_LAYERS_HPP_

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "a2/ops.hpp"
#include "a2/rng.hpp"
#include "a2/tensor.hpp"

namespace a2 {

// Named views into a module's trainable tensors; the optimizer and the
// checkpoint writer both work through this.
using ParamMap = std::vector<std::pair<std::string, Tensor*>>;

// Hook a layer calls between attention and feed-forward; the model binds the
// adapter bank and language here. Identity when empty.
using AdapterHook = std::function<Tensor(const Tensor&)>;

struct Linear {
  Tensor w;  // [in x out]
  Tensor b;  // [out]; undefined when bias-free
  static Linear Init(int64_t in, int64_t out, Rng& rng, bool bias = true);
  Tensor Forward(const Tensor& x) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

struct LayerNormParams {
  Tensor gamma;
  Tensor beta;
  static LayerNormParams Init(int64_t d);
  Tensor Forward(const Tensor& x) const { return LayerNorm(x, gamma, beta); }
  void CollectParams(const std::string& prefix, ParamMap* out);
};

// Attention masks are constant 0/1 tensors, 1 = may attend.
Tensor CausalMask(int64_t len);

struct MultiHeadAttention {
  int64_t model_dim = 0;
  int heads = 1;
  Linear wq, wk, wv, wo;  // bias-free projections

  static MultiHeadAttention Init(int64_t d, int heads, Rng& rng);
  // mask, when present, must be [Tq x Tk]. A fully masked query row yields a
  // zero output vector.
  Tensor Forward(const Tensor& query, const Tensor& key, const Tensor& value,
                 const Tensor* mask = nullptr) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

struct FeedForward {
  Linear w1, w2;
  static FeedForward Init(int64_t d, int64_t hidden, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

// Sinusoidal table: PE[t][2i] = sin(t / 10000^(2i/d)), PE[t][2i+1] = cos(...).
Tensor PositionalEncoding(int64_t len, int64_t d);

// Frame stacker: concatenates `stack` consecutive frames (zero-padding the
// tail) and projects F*stack -> d, halving the sequence length at stack=2.
struct FrontEnd {
  int64_t feat_dim = 0;
  int stack = 1;
  Linear proj;
  static FrontEnd Init(int64_t feat_dim, int stack, int64_t d, Rng& rng);
  // [T x F] -> [ceil(T/stack) x d]
  Tensor Forward(const Tensor& frames) const;
  static int64_t OutputLength(int64_t frames, int stack) {
    return (frames + stack - 1) / stack;
  }
  void CollectParams(const std::string& prefix, ParamMap* out);
};

// Encoder layer: pre-norm self-attention with residual, then the adapter
// slot (residual inside the hook), then feed-forward.
struct EncoderLayer {
  LayerNormParams ln;
  MultiHeadAttention self_attn;
  FeedForward ffn;
  static EncoderLayer Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng);
  Tensor Forward(const Tensor& h, const AdapterHook& adapter) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

// Decoder layer: causal self-attention, cross-attention over encoder states,
// adapter slot, feed-forward.
struct DecoderLayer {
  LayerNormParams ln_self;
  MultiHeadAttention self_attn;
  LayerNormParams ln_cross;
  MultiHeadAttention cross_attn;
  FeedForward ffn;
  static DecoderLayer Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng);
  Tensor Forward(const Tensor& h, const Tensor& memory, const Tensor& causal_mask,
                 const AdapterHook& adapter) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

}  // namespace a2

#endif  // A2_LAYERS_HPP_
