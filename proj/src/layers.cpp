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

#include "a2/layers.hpp"

#include <cmath>

#include "a2/error.hpp"

namespace a2 {

namespace {
constexpr double kMaskedLogit = -1e30;

Tensor InitWeight(int64_t in, int64_t out, Rng& rng) {
  std::vector<double> w(static_cast<size_t>(in * out));
  double scale = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : w) v = rng.Normal() * scale;
  return Tensor::FromData({in, out}, std::move(w)).WithGrad();
}
}  // namespace

Linear Linear::Init(int64_t in, int64_t out, Rng& rng, bool bias) {
  Linear l;
  l.w = InitWeight(in, out, rng);
  if (bias) l.b = Tensor::Zeros({out}).WithGrad();
  return l;
}

Tensor Linear::Forward(const Tensor& x) const {
  Tensor in = x;
  bool vector_input = x.rank() == 1;
  if (vector_input) in = Reshape(x, {1, x.dim(0)});
  if (in.dim(1) != w.dim(0)) {
    throw DimensionError("linear: input " + in.ShapeString() + " vs weight " +
                         w.ShapeString());
  }
  Tensor out = MatMul(in, w);
  if (b.defined()) out = AddRowBroadcast(out, b);
  if (vector_input) out = Reshape(out, {w.dim(1)});
  return out;
}

void Linear::CollectParams(const std::string& prefix, ParamMap* out) {
  out->emplace_back(prefix + ".w", &w);
  if (b.defined()) out->emplace_back(prefix + ".b", &b);
}

LayerNormParams LayerNormParams::Init(int64_t d) {
  LayerNormParams ln;
  ln.gamma = Tensor::Full({d}, 1.0).WithGrad();
  ln.beta = Tensor::Zeros({d}).WithGrad();
  return ln;
}

void LayerNormParams::CollectParams(const std::string& prefix, ParamMap* out) {
  out->emplace_back(prefix + ".gamma", &gamma);
  out->emplace_back(prefix + ".beta", &beta);
}

Tensor CausalMask(int64_t len) {
  std::vector<double> m(static_cast<size_t>(len * len), 0.0);
  for (int64_t i = 0; i < len; ++i)
    for (int64_t j = 0; j <= i; ++j) m[static_cast<size_t>(i * len + j)] = 1.0;
  return Tensor::FromData({len, len}, std::move(m));
}

MultiHeadAttention MultiHeadAttention::Init(int64_t d, int heads, Rng& rng) {
  if (heads <= 0 || d % heads != 0) {
    throw ConfigError("attention: head count " + std::to_string(heads) +
                      " must divide model dim " + std::to_string(d));
  }
  MultiHeadAttention mha;
  mha.model_dim = d;
  mha.heads = heads;
  mha.wq = Linear::Init(d, d, rng, /*bias=*/false);
  mha.wk = Linear::Init(d, d, rng, /*bias=*/false);
  mha.wv = Linear::Init(d, d, rng, /*bias=*/false);
  mha.wo = Linear::Init(d, d, rng, /*bias=*/false);
  return mha;
}

Tensor MultiHeadAttention::Forward(const Tensor& query, const Tensor& key,
                                   const Tensor& value, const Tensor* mask) const {
  int64_t tq = query.dim(0);
  int64_t tk = key.dim(0);
  if (key.dim(0) != value.dim(0)) {
    throw DimensionError("attention: key/value length mismatch");
  }
  Tensor q = wq.Forward(query);
  Tensor k = wk.Forward(key);
  Tensor v = wv.Forward(value);

  Tensor mask_bias;
  Tensor row_keep;  // zeroes fully masked query rows after softmax
  if (mask != nullptr) {
    if (mask->rank() != 2 || mask->dim(0) != tq || mask->dim(1) != tk) {
      throw DimensionError("attention: mask " + mask->ShapeString() +
                           " does not cover " + std::to_string(tq) + "x" +
                           std::to_string(tk));
    }
    std::vector<double> bias(static_cast<size_t>(tq * tk));
    std::vector<double> keep(static_cast<size_t>(tq * tk), 1.0);
    const auto& md = mask->data();
    for (int64_t i = 0; i < tq; ++i) {
      bool any = false;
      for (int64_t j = 0; j < tk; ++j) {
        bool on = md[static_cast<size_t>(i * tk + j)] != 0.0;
        bias[static_cast<size_t>(i * tk + j)] = on ? 0.0 : kMaskedLogit;
        any = any || on;
      }
      if (!any) {
        for (int64_t j = 0; j < tk; ++j) keep[static_cast<size_t>(i * tk + j)] = 0.0;
      }
    }
    mask_bias = Tensor::FromData({tq, tk}, std::move(bias));
    row_keep = Tensor::FromData({tq, tk}, std::move(keep));
  }

  int64_t dk = model_dim / heads;
  double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> head_outputs;
  head_outputs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Tensor qh = SliceCols(q, h * dk, (h + 1) * dk);
    Tensor kh = SliceCols(k, h * dk, (h + 1) * dk);
    Tensor vh = SliceCols(v, h * dk, (h + 1) * dk);
    Tensor scores = Scale(MatMul(qh, Transpose(kh)), inv_sqrt_dk);
    if (mask_bias.defined()) scores = Add(scores, mask_bias);
    Tensor weights = Softmax(scores);
    if (row_keep.defined()) weights = Mul(weights, row_keep);
    head_outputs.push_back(MatMul(weights, vh));
  }
  Tensor concat = heads == 1 ? head_outputs[0] : ConcatCols(head_outputs);
  return wo.Forward(concat);
}

void MultiHeadAttention::CollectParams(const std::string& prefix, ParamMap* out) {
  wq.CollectParams(prefix + ".wq", out);
  wk.CollectParams(prefix + ".wk", out);
  wv.CollectParams(prefix + ".wv", out);
  wo.CollectParams(prefix + ".wo", out);
}

FeedForward FeedForward::Init(int64_t d, int64_t hidden, Rng& rng) {
  FeedForward f;
  f.w1 = Linear::Init(d, hidden, rng);
  f.w2 = Linear::Init(hidden, d, rng);
  return f;
}

Tensor FeedForward::Forward(const Tensor& x) const {
  return w2.Forward(Relu(w1.Forward(x)));
}

void FeedForward::CollectParams(const std::string& prefix, ParamMap* out) {
  w1.CollectParams(prefix + ".w1", out);
  w2.CollectParams(prefix + ".w2", out);
}

Tensor PositionalEncoding(int64_t len, int64_t d) {
  if (len < 1 || d < 1) throw DimensionError("positional_encoding: T,d must be >= 1");
  std::vector<double> pe(static_cast<size_t>(len * d));
  for (int64_t t = 0; t < len; ++t) {
    for (int64_t i = 0; i < d; i += 2) {
      double rate = std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
      double angle = static_cast<double>(t) / rate;
      pe[static_cast<size_t>(t * d + i)] = std::sin(angle);
      if (i + 1 < d) pe[static_cast<size_t>(t * d + i + 1)] = std::cos(angle);
    }
  }
  return Tensor::FromData({len, d}, std::move(pe));
}

FrontEnd FrontEnd::Init(int64_t feat_dim, int stack, int64_t d, Rng& rng) {
  if (stack < 1) throw ConfigError("frontend: stack factor must be >= 1");
  FrontEnd fe;
  fe.feat_dim = feat_dim;
  fe.stack = stack;
  fe.proj = Linear::Init(feat_dim * stack, d, rng);
  return fe;
}

Tensor FrontEnd::Forward(const Tensor& frames) const {
  if (frames.rank() != 2 || frames.dim(1) != feat_dim) {
    throw DimensionError("frontend: frames " + frames.ShapeString() +
                         " do not match feature dim " + std::to_string(feat_dim));
  }
  int64_t t = frames.dim(0);
  int64_t out_len = OutputLength(t, stack);
  Tensor padded = PadRows(frames, out_len * stack);
  Tensor stacked = Reshape(padded, {out_len, static_cast<int64_t>(stack) * feat_dim});
  return proj.Forward(stacked);
}

void FrontEnd::CollectParams(const std::string& prefix, ParamMap* out) {
  proj.CollectParams(prefix, out);
}

EncoderLayer EncoderLayer::Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng) {
  EncoderLayer l;
  l.ln = LayerNormParams::Init(d);
  l.self_attn = MultiHeadAttention::Init(d, heads, rng);
  l.ffn = FeedForward::Init(d, ffn_hidden, rng);
  return l;
}

Tensor EncoderLayer::Forward(const Tensor& h, const AdapterHook& adapter) const {
  Tensor normed = ln.Forward(h);
  Tensor o = Add(h, self_attn.Forward(normed, normed, normed));
  Tensor a = adapter ? adapter(o) : o;
  return ffn.Forward(a);
}

void EncoderLayer::CollectParams(const std::string& prefix, ParamMap* out) {
  ln.CollectParams(prefix + ".ln", out);
  self_attn.CollectParams(prefix + ".self", out);
  ffn.CollectParams(prefix + ".ffn", out);
}

DecoderLayer DecoderLayer::Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng) {
  DecoderLayer l;
  l.ln_self = LayerNormParams::Init(d);
  l.self_attn = MultiHeadAttention::Init(d, heads, rng);
  l.ln_cross = LayerNormParams::Init(d);
  l.cross_attn = MultiHeadAttention::Init(d, heads, rng);
  l.ffn = FeedForward::Init(d, ffn_hidden, rng);
  return l;
}

Tensor DecoderLayer::Forward(const Tensor& h, const Tensor& memory,
                             const Tensor& causal_mask, const AdapterHook& adapter) const {
  Tensor normed = ln_self.Forward(h);
  Tensor o1 = Add(h, self_attn.Forward(normed, normed, normed, &causal_mask));
  Tensor o2 = Add(o1, cross_attn.Forward(ln_cross.Forward(o1), memory, memory));
  Tensor a = adapter ? adapter(o2) : o2;
  return ffn.Forward(a);
}

void DecoderLayer::CollectParams(const std::string& prefix, ParamMap* out) {
  ln_self.CollectParams(prefix + ".ln_self", out);
  self_attn.CollectParams(prefix + ".self", out);
  ln_cross.CollectParams(prefix + ".ln_cross", out);
  cross_attn.CollectParams(prefix + ".cross", out);
  ffn.CollectParams(prefix + ".ffn", out);
}

}  // namespace a2
