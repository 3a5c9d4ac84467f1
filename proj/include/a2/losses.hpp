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

#ifndef A2_LOSSES_HPP_
#define A2_LOSSES_HPP_

#include <span>
#include <vector>

#include "a2/rng.hpp"
#include "a2/tensor.hpp"

namespace a2 {

// Smoothed class prior over the attention vocabulary. Zero-count classes get
// mass 1/(n0*C); the deficit is charged evenly to the observed classes, so
// the vector always sums to one. With no zero-count class the priors are the
// plain relative frequencies.
struct ClassPriors {
  std::vector<double> pi;
  std::vector<double> log_pi;
  std::vector<int64_t> counts;
  int64_t total = 0;         // C
  int64_t zero_classes = 0;  // n0
  int64_t num_classes() const { return static_cast<int64_t>(pi.size()); }
};

ClassPriors EstimatePriors(const std::vector<std::vector<int>>& sequences,
                           int64_t num_classes);
ClassPriors PriorsFromCounts(const std::vector<int64_t>& counts);

// Alignment-free sequence loss: -log of the total probability of every
// frame labeling (over tokens plus blank) that collapses to `targets`,
// computed with the log-domain forward recursion over the blank-interleaved
// label sequence. Backward is the classic alpha-beta gradient.
//
// When no alignment fits into the available frames the loss is +inf, the
// utterance contributes no gradient, and *infeasible_counter (if given) is
// bumped.
Tensor CtcLoss(const Tensor& log_probs /* [T x (V+1)] */, std::span<const int> targets,
               int blank, int64_t* infeasible_counter = nullptr);

enum class KlDirection {
  kLabelToModel,  // KL(p_y || p_attn): label-smoothed cross-entropy plus a constant
  kModelToLabel,  // KL(p_attn || p_y)
};

// Per-step KL between the smoothed label distribution
// p_y = (1-eps)*onehot + eps*uniform and the model distribution
// softmax(logits), averaged over steps. `logits` rows must align with
// `targets` (which end with <eos>).
Tensor AttentionLoss(const Tensor& logits /* [U x V] */, std::span<const int> targets,
                     double epsilon_ls,
                     KlDirection direction = KlDirection::kLabelToModel);

// lambda * ctc + (1 - lambda) * attn, both in minimization orientation.
Tensor MtlLoss(const Tensor& ctc_loss, const Tensor& attn_loss, double lambda);

// f - tau * log(pi), elementwise over the class axis. Accepts [V] or [U x V].
// tau = 0 returns the input unchanged.
Tensor AdjustLogits(const Tensor& logits, const ClassPriors& priors, double tau);

// Teacher-forcing mixer: with probability `mix_prob` returns the argmax of
// the (adjusted) step distribution, otherwise the gold token.
int ScheduledSample(std::span<const double> step_dist, int gold_token, double mix_prob,
                    Rng& rng);

}  // namespace a2

#endif  // A2_LOSSES_HPP_
