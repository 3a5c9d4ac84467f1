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

#include "a2/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "a2/error.hpp"

namespace a2 {

double GradCheck(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                 double eps) {
  GradTape tape;
  Tensor xg = x.WithGrad();
  Tensor y;
  {
    TapeScope scope(tape);
    y = f(xg);
  }
  if (y.size() != 1) throw ContractError("GradCheck: f must be scalar-valued");
  tape.Backward(y);
  std::vector<double> analytic(static_cast<size_t>(x.size()), 0.0);
  if (auto g = tape.Grad(xg)) analytic = g->data();

  const std::vector<double>& base = x.data();
  double max_rel = 0.0;
  for (size_t i = 0; i < base.size(); ++i) {
    std::vector<double> plus = base;
    std::vector<double> minus = base;
    plus[i] += eps;
    minus[i] -= eps;
    double fp = f(Tensor::FromData(x.shape(), std::move(plus))).item();
    double fm = f(Tensor::FromData(x.shape(), std::move(minus))).item();
    double numeric = (fp - fm) / (2.0 * eps);
    double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::fabs(analytic[i] - numeric) / denom);
  }
  return max_rel;
}

}  // namespace a2
