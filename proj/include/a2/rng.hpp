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

#ifndef A2_RNG_HPP_
#define A2_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace a2 {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
// the standard); all value transforms are implemented here rather than with
// std::*_distribution, whose output is implementation-defined. Reruns with
// the same seed therefore produce identical streams on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  int64_t UniformInt(int64_t lo, int64_t hi);

  // Standard normal via Box-Muller (no state carried between calls).
  double Normal();

  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Index draw from an unnormalized weight vector.
  size_t Categorical(std::span<const double> weights);

  // Independent child stream derived from (seed, tag); does not consume
  // state from this stream.
  Rng Fork(uint64_t tag) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

// Stable 64-bit mix used for stream derivation and config hashing.
uint64_t HashMix(uint64_t a, uint64_t b);

}  // namespace a2

#endif  // A2_RNG_HPP_
