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

#ifndef A2_GRADCHECK_HPP_
#define A2_GRADCHECK_HPP_

#include <functional>

#include "a2/tensor.hpp"

namespace a2 {

// Compares the tape gradient of a scalar-valued function against central
// finite differences, elementwise over x. Returns the max relative error
// with denominator max(|analytic|, |numeric|, 1e-8).
double GradCheck(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                 double eps = 1e-5);

}  // namespace a2

#endif  // A2_GRADCHECK_HPP_
