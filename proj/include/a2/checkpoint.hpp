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

#ifndef A2_CHECKPOINT_HPP_
#define A2_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "a2/layers.hpp"
#include "a2/tensor.hpp"

namespace a2 {

// On disk: a single-line UTF-8 JSON header (format version, config echo,
// parameter manifest with shapes and byte offsets), a newline, then one blob
// of little-endian IEEE-754 doubles. Round-trips bit-exactly.
struct Checkpoint {
  nlohmann::json header;
  std::vector<std::pair<std::string, Tensor>> params;  // manifest order

  const Tensor* Find(const std::string& name) const;
};

void SaveCheckpoint(const std::string& path, const ParamMap& params,
                    const nlohmann::json& config_echo);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies checkpoint tensors into live parameters; names and shapes must
// match exactly.
void LoadIntoParams(const Checkpoint& ckpt, const ParamMap& params);

// Elementwise arithmetic mean; all manifests must be identical.
Checkpoint AverageCheckpoints(const std::vector<std::string>& paths);

void SaveCheckpointRaw(const std::string& path, const Checkpoint& ckpt);

}  // namespace a2

#endif  // A2_CHECKPOINT_HPP_
