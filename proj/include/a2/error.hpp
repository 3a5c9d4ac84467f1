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

#ifndef A2_ERROR_HPP_
#define A2_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace a2 {

// Shape/extent mismatches between tensors or layers.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse (e.g. backward on a non-scalar root).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// A language tag that does not resolve to an adapter key.
struct RoutingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or missing corpus/utterance data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration values or incompatible settings.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace a2

#endif  // A2_ERROR_HPP_
