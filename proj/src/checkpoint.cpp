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

#include "a2/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "a2/error.hpp"

namespace a2 {

namespace {

constexpr int kFormatVersion = 1;

void AppendDoubleLE(double v, std::string* out) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out->push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

double ReadDoubleLE(const char* p) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

const Tensor* Checkpoint::Find(const std::string& name) const {
  for (const auto& [n, t] : params) {
    if (n == name) return &t;
  }
  return nullptr;
}

void SaveCheckpoint(const std::string& path, const ParamMap& params,
                    const nlohmann::json& config_echo) {
  nlohmann::json manifest = nlohmann::json::array();
  std::string blob;
  int64_t offset = 0;
  for (const auto& [name, tensor] : params) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = tensor->shape();
    entry["offset"] = offset;  // bytes into the payload
    entry["count"] = tensor->size();
    manifest.push_back(entry);
    for (double v : tensor->data()) AppendDoubleLE(v, &blob);
    offset += tensor->size() * 8;
  }
  nlohmann::json header;
  header["format_version"] = kFormatVersion;
  header["config"] = config_echo;
  header["params"] = manifest;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("short write on checkpoint: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("checkpoint missing header: " + path);
  Checkpoint ckpt;
  ckpt.header = nlohmann::json::parse(header_line);
  if (ckpt.header.value("format_version", -1) != kFormatVersion) {
    throw DataError("unsupported checkpoint format in " + path);
  }
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (const auto& entry : ckpt.header.at("params")) {
    std::string name = entry.at("name");
    std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
    int64_t offset = entry.at("offset");
    int64_t count = entry.at("count");
    if (offset + count * 8 > static_cast<int64_t>(blob.size())) {
      throw DataError("checkpoint payload truncated: " + path);
    }
    std::vector<double> data(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
      data[static_cast<size_t>(i)] = ReadDoubleLE(blob.data() + offset + i * 8);
    }
    ckpt.params.emplace_back(name, Tensor::FromData(std::move(shape), std::move(data)));
  }
  return ckpt;
}

void LoadIntoParams(const Checkpoint& ckpt, const ParamMap& params) {
  for (const auto& [name, live] : params) {
    const Tensor* stored = ckpt.Find(name);
    if (stored == nullptr) throw DataError("checkpoint missing parameter " + name);
    if (stored->shape() != live->shape()) {
      throw DataError("checkpoint shape mismatch for " + name + ": " +
                      stored->ShapeString() + " vs " + live->ShapeString());
    }
    *live = Tensor::FromData(stored->shape(), stored->data()).WithGrad();
  }
}

Checkpoint AverageCheckpoints(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ContractError("average: no checkpoints given");
  Checkpoint first = LoadCheckpoint(paths[0]);
  std::vector<std::vector<double>> sums;
  sums.reserve(first.params.size());
  for (const auto& [name, t] : first.params) sums.push_back(t.data());

  for (size_t p = 1; p < paths.size(); ++p) {
    Checkpoint next = LoadCheckpoint(paths[p]);
    if (next.params.size() != first.params.size()) {
      throw DataError("checkpoint manifest mismatch: " + paths[p]);
    }
    for (size_t i = 0; i < next.params.size(); ++i) {
      if (next.params[i].first != first.params[i].first ||
          next.params[i].second.shape() != first.params[i].second.shape()) {
        throw DataError("checkpoint manifest mismatch at " + next.params[i].first);
      }
      const auto& d = next.params[i].second.data();
      for (size_t j = 0; j < d.size(); ++j) sums[i][j] += d[j];
    }
  }
  double inv = 1.0 / static_cast<double>(paths.size());
  Checkpoint avg;
  avg.header = first.header;
  avg.header["averaged_over"] = paths.size();
  for (size_t i = 0; i < first.params.size(); ++i) {
    for (double& v : sums[i]) v *= inv;
    avg.params.emplace_back(first.params[i].first,
                            Tensor::FromData(first.params[i].second.shape(),
                                             std::move(sums[i])));
  }
  return avg;
}

void SaveCheckpointRaw(const std::string& path, const Checkpoint& ckpt) {
  ParamMap view;
  std::vector<Tensor> holders;
  holders.reserve(ckpt.params.size());
  for (const auto& [name, t] : ckpt.params) holders.push_back(t);
  for (size_t i = 0; i < holders.size(); ++i) {
    view.emplace_back(ckpt.params[i].first, &holders[i]);
  }
  SaveCheckpoint(path, view, ckpt.header.value("config", nlohmann::json::object()));
}

}  // namespace a2
