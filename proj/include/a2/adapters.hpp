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

#ifndef A2_ADAPTERS_HPP_
#define A2_ADAPTERS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "a2/layers.hpp"

namespace a2 {

// Bottleneck residual adapter: up(ReLU(down(layernorm(h)))) + h. The up
// projection starts at zero so a fresh adapter is an exact identity.
struct Adapter {
  LayerNormParams ln;
  Linear down;  // d -> b
  Linear up;    // b -> d, zero-init
  static Adapter Init(int64_t d, int64_t bottleneck, Rng& rng);
  Tensor Forward(const Tensor& h) const;
  // The non-residual part up(ReLU(down(ln(h)))).
  Tensor Delta(const Tensor& h) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
  static int64_t ParamCount(int64_t d, int64_t bottleneck) {
    return d * bottleneck + bottleneck + bottleneck * d + d + 2 * d;
  }
};

// Maps language tags to adapter keys. Individual keeps one key per language;
// the family/script tables cover the CommonVoice language codes.
struct AdapterGrouping {
  std::map<std::string, std::string> lang_to_key;

  static AdapterGrouping Individual(const std::vector<std::string>& langs);
  static AdapterGrouping ByFamily(const std::vector<std::string>& langs);
  static AdapterGrouping ByScript(const std::vector<std::string>& langs);
  static AdapterGrouping Custom(std::map<std::string, std::string> mapping);

  const std::string& KeyFor(const std::string& lang) const;
  std::vector<std::string> Keys() const;  // distinct keys, sorted
};

// Per-utterance adapter-key assignment from language tags; consumed by
// DualAdapterBank::Forward. Empty tags are data errors.
std::vector<std::string> MakeLanguageMask(const std::vector<std::string>& langs,
                                          const AdapterGrouping& grouping);

// One language-specific adapter per key plus one shared common adapter.
// Default combination keeps a single residual copy of h:
//   o = h + delta_lang(h) + delta_com(h).
// The literal sum of both adapter outputs (which carries h twice) stays
// available behind `literal_residual`.
struct DualAdapterBank {
  std::map<std::string, Adapter> lang_adapters;
  std::optional<Adapter> common;
  AdapterGrouping grouping;
  bool literal_residual = false;

  static DualAdapterBank Init(const AdapterGrouping& grouping, int64_t d,
                              int64_t bottleneck, bool use_common, Rng& rng);
  Tensor Forward(const Tensor& h, const std::string& lang) const;
  void CollectParams(const std::string& prefix, ParamMap* out);
};

}  // namespace a2

#endif  // A2_ADAPTERS_HPP_
