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

#include "a2/adapters.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "a2/error.hpp"

namespace a2 {

namespace {

// CommonVoice language groups (written script / language family).
const std::map<std::string, std::string>& ScriptTable() {
  static const std::map<std::string, std::string> table = {
      {"en", "latin"},    {"fr", "latin"}, {"es", "latin"}, {"it", "latin"},
      {"nl", "latin"},    {"tr", "latin"}, {"sv", "latin"}, {"zh", "chinese"},
      {"ru", "cyrillic"}, {"tt", "cyrillic"}, {"ky", "cyrillic"},
  };
  return table;
}

const std::map<std::string, std::string>& FamilyTable() {
  static const std::map<std::string, std::string> table = {
      {"en", "germanic"}, {"nl", "germanic"}, {"fr", "romance"}, {"es", "romance"},
      {"it", "romance"},  {"sv", "romance"},  {"tr", "turkic"},  {"tt", "turkic"},
      {"ky", "turkic"},   {"zh", "chinese"},
  };
  return table;
}

AdapterGrouping FromTable(const std::vector<std::string>& langs,
                          const std::map<std::string, std::string>& table,
                          const char* table_name) {
  AdapterGrouping g;
  for (const std::string& lang : langs) {
    auto it = table.find(lang);
    if (it == table.end()) {
      throw ConfigError("language '" + lang + "' has no " + std::string(table_name) +
                        " group; use a custom grouping map");
    }
    g.lang_to_key[lang] = it->second;
  }
  return g;
}

}  // namespace

Adapter Adapter::Init(int64_t d, int64_t bottleneck, Rng& rng) {
  if (bottleneck >= d) {
    throw ConfigError("adapter: bottleneck " + std::to_string(bottleneck) +
                      " must be smaller than model dim " + std::to_string(d));
  }
  Adapter a;
  a.ln = LayerNormParams::Init(d);
  a.down = Linear::Init(d, bottleneck, rng);
  a.up = Linear::Init(bottleneck, d, rng);
  a.up.w = Tensor::Zeros({bottleneck, d}).WithGrad();  // identity at init
  return a;
}

Tensor Adapter::Delta(const Tensor& h) const {
  return up.Forward(Relu(down.Forward(ln.Forward(h))));
}

Tensor Adapter::Forward(const Tensor& h) const { return Add(Delta(h), h); }

void Adapter::CollectParams(const std::string& prefix, ParamMap* out) {
  ln.CollectParams(prefix + ".ln", out);
  down.CollectParams(prefix + ".down", out);
  up.CollectParams(prefix + ".up", out);
}

AdapterGrouping AdapterGrouping::Individual(const std::vector<std::string>& langs) {
  AdapterGrouping g;
  for (const std::string& lang : langs) g.lang_to_key[lang] = lang;
  return g;
}

AdapterGrouping AdapterGrouping::ByFamily(const std::vector<std::string>& langs) {
  return FromTable(langs, FamilyTable(), "family");
}

AdapterGrouping AdapterGrouping::ByScript(const std::vector<std::string>& langs) {
  return FromTable(langs, ScriptTable(), "script");
}

AdapterGrouping AdapterGrouping::Custom(std::map<std::string, std::string> mapping) {
  AdapterGrouping g;
  g.lang_to_key = std::move(mapping);
  return g;
}

const std::string& AdapterGrouping::KeyFor(const std::string& lang) const {
  auto it = lang_to_key.find(lang);
  if (it == lang_to_key.end()) {
    std::ostringstream os;
    os << "unknown language '" << lang << "'; known:";
    for (const auto& [l, k] : lang_to_key) os << " " << l << "->" << k;
    throw RoutingError(os.str());
  }
  return it->second;
}

std::vector<std::string> AdapterGrouping::Keys() const {
  std::set<std::string> keys;
  for (const auto& [lang, key] : lang_to_key) keys.insert(key);
  return {keys.begin(), keys.end()};
}

std::vector<std::string> MakeLanguageMask(const std::vector<std::string>& langs,
                                          const AdapterGrouping& grouping) {
  std::vector<std::string> mask;
  mask.reserve(langs.size());
  for (const std::string& lang : langs) {
    if (lang.empty()) throw DataError("utterance without a language tag");
    mask.push_back(grouping.KeyFor(lang));
  }
  return mask;
}

DualAdapterBank DualAdapterBank::Init(const AdapterGrouping& grouping, int64_t d,
                                      int64_t bottleneck, bool use_common, Rng& rng) {
  DualAdapterBank bank;
  bank.grouping = grouping;
  for (const std::string& key : grouping.Keys()) {
    bank.lang_adapters.emplace(key, Adapter::Init(d, bottleneck, rng));
  }
  if (use_common) bank.common = Adapter::Init(d, bottleneck, rng);
  return bank;
}

Tensor DualAdapterBank::Forward(const Tensor& h, const std::string& lang) const {
  const std::string& key = grouping.KeyFor(lang);
  auto it = lang_adapters.find(key);
  if (it == lang_adapters.end()) {
    throw RoutingError("no adapter for key '" + key + "'");
  }
  const Adapter& lang_adapter = it->second;
  if (literal_residual) {
    Tensor o = lang_adapter.Forward(h);
    if (common) o = Add(o, common->Forward(h));
    return o;
  }
  Tensor o = Add(h, lang_adapter.Delta(h));
  if (common) o = Add(o, common->Delta(h));
  return o;
}

void DualAdapterBank::CollectParams(const std::string& prefix, ParamMap* out) {
  for (auto& [key, adapter] : lang_adapters) {
    adapter.CollectParams(prefix + ".lang." + key, out);
  }
  if (common) common->CollectParams(prefix + ".common", out);
}

}  // namespace a2
