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

#include "a2/model.hpp"

#include <cmath>

#include "a2/error.hpp"

namespace a2 {

namespace {

bool EncoderAdaptersOn(const ModelConfig& cfg) {
  return cfg.adapters_enabled &&
         (cfg.adapter_placement == "encoder" || cfg.adapter_placement == "both");
}

bool DecoderAdaptersOn(const ModelConfig& cfg) {
  return cfg.adapters_enabled &&
         (cfg.adapter_placement == "decoder" || cfg.adapter_placement == "both");
}

AdapterHook BindAdapter(const std::vector<DualAdapterBank>& banks, size_t layer,
                        const std::string& lang) {
  if (banks.empty()) return nullptr;
  const DualAdapterBank* bank = &banks[layer];
  return [bank, lang](const Tensor& h) { return bank->Forward(h, lang); };
}

}  // namespace

SpeechTransformer SpeechTransformer::Init(const ModelConfig& cfg,
                                          const AdapterGrouping& grouping, Rng& rng) {
  if (cfg.vocab_size <= 0) throw ConfigError("model: vocab_size must be positive");
  if (cfg.adapters_enabled && cfg.adapter_placement != "encoder" &&
      cfg.adapter_placement != "decoder" && cfg.adapter_placement != "both") {
    throw ConfigError("model: adapter placement '" + cfg.adapter_placement +
                      "' not in {encoder, decoder, both}");
  }
  SpeechTransformer m;
  m.cfg = cfg;
  // Separate streams keep backbone weights independent of the adapter
  // configuration: disabling adapters never shifts the backbone draw.
  Rng backbone_rng = rng.Fork(0x6261636bULL);
  Rng adapter_rng = rng.Fork(0x61646170ULL);

  m.frontend = FrontEnd::Init(cfg.feat_dim, cfg.frontend_stack, cfg.enc_dim, backbone_rng);
  for (int i = 0; i < cfg.enc_layers; ++i) {
    m.encoder.push_back(
        EncoderLayer::Init(cfg.enc_dim, cfg.enc_heads, cfg.enc_ffn, backbone_rng));
  }
  for (int i = 0; i < cfg.dec_layers; ++i) {
    m.decoder.push_back(
        DecoderLayer::Init(cfg.dec_dim, cfg.dec_heads, cfg.dec_ffn, backbone_rng));
  }
  {
    std::vector<double> e(static_cast<size_t>(cfg.vocab_size * cfg.dec_dim));
    double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dec_dim));
    for (double& v : e) v = backbone_rng.Normal() * scale;
    m.embed = Tensor::FromData({cfg.vocab_size, cfg.dec_dim}, std::move(e)).WithGrad();
  }
  m.ctc_head = Linear::Init(cfg.enc_dim, cfg.vocab_size + 1, backbone_rng);
  m.out_proj = Linear::Init(cfg.dec_dim, cfg.vocab_size, backbone_rng, /*bias=*/false);
  if (cfg.enc_dim != cfg.dec_dim) {
    m.bridge = Linear::Init(cfg.enc_dim, cfg.dec_dim, backbone_rng);
  }

  if (EncoderAdaptersOn(cfg)) {
    for (int i = 0; i < cfg.enc_layers; ++i) {
      m.encoder_adapters.push_back(
          DualAdapterBank::Init(grouping, cfg.enc_dim, cfg.adapter_bottleneck,
                                cfg.adapter_use_common, adapter_rng));
      m.encoder_adapters.back().literal_residual = cfg.adapter_literal_residual;
    }
  }
  if (DecoderAdaptersOn(cfg)) {
    for (int i = 0; i < cfg.dec_layers; ++i) {
      m.decoder_adapters.push_back(
          DualAdapterBank::Init(grouping, cfg.dec_dim, cfg.adapter_bottleneck,
                                cfg.adapter_use_common, adapter_rng));
      m.decoder_adapters.back().literal_residual = cfg.adapter_literal_residual;
    }
  }
  return m;
}

Tensor SpeechTransformer::Encode(const Tensor& frames, int64_t valid_frames,
                                 const std::string& lang) const {
  if (frames.rank() != 2 || frames.dim(1) != cfg.feat_dim) {
    throw DimensionError("encode: frames " + frames.ShapeString() +
                         " vs feature dim " + std::to_string(cfg.feat_dim));
  }
  if (valid_frames < 1 || valid_frames > frames.dim(0)) {
    throw DimensionError("encode: invalid frame count " + std::to_string(valid_frames));
  }
  Tensor x = valid_frames == frames.dim(0) ? frames : SliceRows(frames, 0, valid_frames);
  Tensor h = frontend.Forward(x);
  int64_t t = h.dim(0);
  h = Scale(h, std::sqrt(static_cast<double>(cfg.enc_dim)));
  h = Add(h, PositionalEncoding(t, cfg.enc_dim));
  for (size_t i = 0; i < encoder.size(); ++i) {
    h = encoder[i].Forward(h, BindAdapter(encoder_adapters, i, lang));
  }
  return h;
}

Tensor SpeechTransformer::CtcLogits(const Tensor& h_enc) const {
  return ctc_head.Forward(h_enc);
}

Tensor SpeechTransformer::DecoderForward(std::span<const int> tokens_in,
                                         const Tensor& h_enc,
                                         const std::string& lang) const {
  if (tokens_in.empty()) throw ContractError("decoder: empty input sequence");
  Tensor e = EmbeddingLookup(embed, tokens_in);
  int64_t u = e.dim(0);
  Tensor h = Scale(e, std::sqrt(static_cast<double>(cfg.dec_dim)));
  h = Add(h, PositionalEncoding(u, cfg.dec_dim));
  Tensor memory = bridge.w.defined() ? bridge.Forward(h_enc) : h_enc;
  Tensor causal = CausalMask(u);
  for (size_t i = 0; i < decoder.size(); ++i) {
    h = decoder[i].Forward(h, memory, causal, BindAdapter(decoder_adapters, i, lang));
  }
  return out_proj.Forward(h);
}

Tensor SpeechTransformer::DecodeStep(std::span<const int> prefix, const Tensor& h_enc,
                                     const std::string& lang) const {
  Tensor logits = DecoderForward(prefix, h_enc, lang);
  int64_t u = logits.dim(0);
  return Reshape(SliceRows(logits, u - 1, u), {cfg.vocab_size});
}

ParamMap SpeechTransformer::Parameters() {
  ParamMap params;
  frontend.CollectParams("enc.frontend", &params);
  for (size_t i = 0; i < encoder.size(); ++i) {
    encoder[i].CollectParams("enc.layer" + std::to_string(i), &params);
  }
  for (size_t i = 0; i < encoder_adapters.size(); ++i) {
    encoder_adapters[i].CollectParams("adapters.enc.layer" + std::to_string(i), &params);
  }
  params.emplace_back("dec.embed", &embed);
  for (size_t i = 0; i < decoder.size(); ++i) {
    decoder[i].CollectParams("dec.layer" + std::to_string(i), &params);
  }
  for (size_t i = 0; i < decoder_adapters.size(); ++i) {
    decoder_adapters[i].CollectParams("adapters.dec.layer" + std::to_string(i), &params);
  }
  ctc_head.CollectParams("ctc_head", &params);
  out_proj.CollectParams("out_proj", &params);
  if (bridge.w.defined()) bridge.CollectParams("bridge", &params);
  return params;
}

int64_t SpeechTransformer::CountParameters() {
  int64_t n = 0;
  for (auto& [name, t] : Parameters()) n += t->size();
  return n;
}

LmLayer LmLayer::Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng) {
  LmLayer l;
  l.ln = LayerNormParams::Init(d);
  l.self_attn = MultiHeadAttention::Init(d, heads, rng);
  l.ffn = FeedForward::Init(d, ffn_hidden, rng);
  return l;
}

Tensor LmLayer::Forward(const Tensor& h, const Tensor& causal_mask) const {
  Tensor normed = ln.Forward(h);
  Tensor o = Add(h, self_attn.Forward(normed, normed, normed, &causal_mask));
  return ffn.Forward(o);
}

void LmLayer::CollectParams(const std::string& prefix, ParamMap* out) {
  ln.CollectParams(prefix + ".ln_self", out);
  self_attn.CollectParams(prefix + ".self", out);
  ffn.CollectParams(prefix + ".ffn", out);
}

TextLm TextLm::Init(const LmConfig& cfg, Rng& rng) {
  if (cfg.vocab_size <= 0) throw ConfigError("lm: vocab_size must be positive");
  TextLm lm;
  lm.cfg = cfg;
  std::vector<double> e(static_cast<size_t>(cfg.vocab_size * cfg.dim));
  double scale = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  for (double& v : e) v = rng.Normal() * scale;
  lm.embed = Tensor::FromData({cfg.vocab_size, cfg.dim}, std::move(e)).WithGrad();
  for (int i = 0; i < cfg.layers; ++i) {
    lm.layers.push_back(LmLayer::Init(cfg.dim, cfg.heads, cfg.ffn, rng));
  }
  lm.head = Linear::Init(cfg.dim, cfg.vocab_size, rng, /*bias=*/false);
  return lm;
}

Tensor TextLm::Forward(std::span<const int> tokens) const {
  if (tokens.empty()) throw ContractError("lm: empty input sequence");
  Tensor e = EmbeddingLookup(embed, tokens);
  int64_t u = e.dim(0);
  Tensor h = Scale(e, std::sqrt(static_cast<double>(cfg.dim)));
  h = Add(h, PositionalEncoding(u, cfg.dim));
  Tensor causal = CausalMask(u);
  for (const LmLayer& layer : layers) h = layer.Forward(h, causal);
  return head.Forward(h);
}

ParamMap TextLm::Parameters() {
  ParamMap params;
  params.emplace_back("lm.embed", &embed);
  for (size_t i = 0; i < layers.size(); ++i) {
    layers[i].CollectParams("lm.layer" + std::to_string(i), &params);
  }
  head.CollectParams("lm.head", &params);
  return params;
}

VocabMap BuildVocabMap(const std::vector<std::string>& lm_tokens,
                       const std::vector<std::string>& asr_tokens) {
  std::map<std::string, int> lm_index;
  for (size_t i = 0; i < lm_tokens.size(); ++i) {
    lm_index.emplace(lm_tokens[i], static_cast<int>(i));
  }
  VocabMap map;
  int matched = 0;
  for (size_t i = 0; i < asr_tokens.size(); ++i) {
    auto it = lm_index.find(asr_tokens[i]);
    if (it != lm_index.end()) {
      map.asr_to_lm[static_cast<int>(i)] = it->second;
      ++matched;
    } else {
      map.unmatched.insert(static_cast<int>(i));
    }
  }
  map.coverage_percent =
      asr_tokens.empty() ? 0.0
                         : 100.0 * static_cast<double>(matched) /
                               static_cast<double>(asr_tokens.size());
  return map;
}

SpeechTransformer TransferParameters(const TextLm& lm, SpeechTransformer model,
                                     const VocabMap& map) {
  if (lm.cfg.dim != model.cfg.dec_dim) {
    throw ConfigError("transfer: LM dim " + std::to_string(lm.cfg.dim) +
                      " vs decoder dim " + std::to_string(model.cfg.dec_dim) +
                      " (no bridge for parameter copy)");
  }
  if (static_cast<int>(lm.layers.size()) < model.cfg.dec_layers) {
    throw ConfigError("transfer: LM has " + std::to_string(lm.layers.size()) +
                      " layers, decoder needs " + std::to_string(model.cfg.dec_layers));
  }

  // Matched token embeddings; unmatched rows keep their current init.
  {
    std::vector<double> rows = model.embed.data();
    int64_t d = model.cfg.dec_dim;
    const auto& lm_rows = lm.embed.data();
    for (const auto& [asr_id, lm_id] : map.asr_to_lm) {
      for (int64_t j = 0; j < d; ++j) {
        rows[static_cast<size_t>(asr_id * d + j)] =
            lm_rows[static_cast<size_t>(lm_id * d + j)];
      }
    }
    model.embed = Tensor::FromData(model.embed.shape(), std::move(rows)).WithGrad();
  }

  auto copy = [](const Tensor& src) {
    return Tensor::FromData(src.shape(), src.data()).WithGrad();
  };
  for (int l = 0; l < model.cfg.dec_layers; ++l) {
    const LmLayer& src = lm.layers[static_cast<size_t>(l)];
    DecoderLayer& dst = model.decoder[static_cast<size_t>(l)];
    dst.ln_self.gamma = copy(src.ln.gamma);
    dst.ln_self.beta = copy(src.ln.beta);
    dst.self_attn.wq.w = copy(src.self_attn.wq.w);
    dst.self_attn.wk.w = copy(src.self_attn.wk.w);
    dst.self_attn.wv.w = copy(src.self_attn.wv.w);
    dst.self_attn.wo.w = copy(src.self_attn.wo.w);
    dst.ffn.w1.w = copy(src.ffn.w1.w);
    dst.ffn.w1.b = copy(src.ffn.w1.b);
    dst.ffn.w2.w = copy(src.ffn.w2.w);
    dst.ffn.w2.b = copy(src.ffn.w2.b);
  }
  return model;
}

}  // namespace a2
