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

#ifndef A2_LOGMATH_HPP_
#define A2_LOGMATH_HPP_

#include <cmath>
#include <limits>

namespace a2 {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  double m = a > b ? a : b;
  return m + std::log1p(std::exp((a > b ? b : a) - m));
}

inline double LogAdd(double a, double b, double c) { return LogAdd(LogAdd(a, b), c); }

}  // namespace a2

#endif  // A2_LOGMATH_HPP_
