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

#include "a2/rng.hpp"

#include <cmath>

#include "a2/error.hpp"

namespace a2 {

int64_t Rng::UniformInt(int64_t lo, int64_t hi) {
  if (lo > hi) throw ContractError("UniformInt: empty range");
  uint64_t n = static_cast<uint64_t>(hi - lo) + 1;
  if (n == 0) return static_cast<int64_t>(engine_());  // full 64-bit range
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return lo + static_cast<int64_t>(x % n);
}

double Rng::Normal() {
  // u1 must be > 0 for the log.
  double u1;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

size_t Rng::Categorical(std::span<const double> weights) {
  if (weights.empty()) throw ContractError("Categorical: no weights");
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw NumericError("Categorical: non-positive mass");
  double u = Uniform() * total;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

Rng Rng::Fork(uint64_t tag) const { return Rng(HashMix(seed_, tag)); }

uint64_t HashMix(uint64_t a, uint64_t b) {
  // splitmix64 finalizer over the combined state.
  uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

}  // namespace a2
