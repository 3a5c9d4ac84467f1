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

#ifndef A2_MODEL_HPP_
#define A2_MODEL_HPP_

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "a2/adapters.hpp"
#include "a2/layers.hpp"

namespace a2 {

struct ModelConfig {
  int64_t feat_dim = 8;
  int enc_layers = 2;
  int dec_layers = 2;
  int64_t enc_dim = 32;
  int64_t dec_dim = 32;
  int enc_heads = 2;
  int dec_heads = 2;
  int64_t enc_ffn = 64;
  int64_t dec_ffn = 64;
  int frontend_stack = 2;
  int64_t vocab_size = 0;  // attention classes; blank is the extra CTC id

  bool adapters_enabled = false;
  std::string adapter_placement = "encoder";  // encoder | decoder | both
  int64_t adapter_bottleneck = 16;
  bool adapter_use_common = true;
  bool adapter_literal_residual = false;
};

// Hybrid CTC-attention encoder/decoder with per-layer dual-adapter slots and
// an optional learned bridge when encoder and decoder widths differ.
struct SpeechTransformer {
  ModelConfig cfg;
  FrontEnd frontend;
  std::vector<EncoderLayer> encoder;
  std::vector<DualAdapterBank> encoder_adapters;  // per layer; empty when off
  std::vector<DecoderLayer> decoder;
  std::vector<DualAdapterBank> decoder_adapters;
  Tensor embed;     // [V x dec_dim]
  Linear ctc_head;  // enc_dim -> V+1
  Linear out_proj;  // dec_dim -> V, bias-free
  Linear bridge;    // enc_dim -> dec_dim, only when dims differ

  static SpeechTransformer Init(const ModelConfig& cfg, const AdapterGrouping& grouping,
                                Rng& rng);

  // [T x F] (optionally right-padded; pass the true frame count) ->
  // [ceil(valid/stack) x enc_dim].
  Tensor Encode(const Tensor& frames, int64_t valid_frames,
                const std::string& lang) const;
  Tensor Encode(const Tensor& frames, const std::string& lang) const {
    return Encode(frames, frames.dim(0), lang);
  }

  // Per-frame logits over V tokens plus the trailing blank.
  Tensor CtcLogits(const Tensor& h_enc) const;

  // Teacher-forced pass over a full [<sos>, y1, ...] input row; row t holds
  // the logits that predict the token after tokens_in[t].
  Tensor DecoderForward(std::span<const int> tokens_in, const Tensor& h_enc,
                        const std::string& lang) const;

  // Logits for the next token after `prefix` (which starts with <sos>).
  Tensor DecodeStep(std::span<const int> prefix, const Tensor& h_enc,
                    const std::string& lang) const;

  ParamMap Parameters();
  int64_t CountParameters();

  int blank_id() const { return static_cast<int>(cfg.vocab_size); }
};

struct LmConfig {
  int64_t vocab_size = 0;
  int64_t dim = 32;
  int layers = 2;
  int heads = 2;
  int64_t ffn = 64;
};

// Decoder-only causal block: the self-attention half of a speech decoder
// layer, so weights map across one-for-one.
struct LmLayer {
  LayerNormParams ln;
  MultiHeadAttention self_attn;
  FeedForward ffn;
  static LmLayer Init(int64_t d, int heads, int64_t ffn_hidden, Rng& rng);
  Tensor Forward(const Tensor& h, const Tensor& causal_mask) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

// Text-only next-token model used as the pretraining source for the speech
// decoder.
struct TextLm {
  LmConfig cfg;
  Tensor embed;  // [V_lm x d]
  std::vector<LmLayer> layers;
  Linear head;  // d -> V_lm, bias-free

  static TextLm Init(const LmConfig& cfg, Rng& rng);
  // [len(tokens) x V_lm]; row t predicts the token after tokens[t].
  Tensor Forward(std::span<const int> tokens) const;
  ParamMap Parameters();
};

// Surface-form match between an ASR vocabulary and an LM vocabulary.
struct VocabMap {
  std::map<int, int> asr_to_lm;  // injective on matched ids
  std::set<int> unmatched;       // ASR ids without an LM counterpart
  double coverage_percent = 0.0;
};

VocabMap BuildVocabMap(const std::vector<std::string>& lm_tokens,
                       const std::vector<std::string>& asr_tokens);

// Copies matched token embeddings and per-layer self-attention + feed-forward
// weights from the LM into the decoder. Cross-attention, unmatched
// embeddings, and the encoder keep their current values. Idempotent.
SpeechTransformer TransferParameters(const TextLm& lm, SpeechTransformer model,
                                     const VocabMap& map);

}  // namespace a2

#endif  // A2_MODEL_HPP_
