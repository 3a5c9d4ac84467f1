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

#include "a2/losses.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "a2/error.hpp"
#include "a2/logmath.hpp"
#include "a2/ops.hpp"

namespace a2 {

ClassPriors PriorsFromCounts(const std::vector<int64_t>& counts) {
  int64_t n = static_cast<int64_t>(counts.size());
  int64_t total = 0;
  int64_t zero = 0;
  for (int64_t c : counts) {
    if (c < 0) throw DataError("negative class count");
    total += c;
    if (c == 0) ++zero;
  }
  if (total == 0) throw DataError("prior estimation over an empty corpus");

  ClassPriors p;
  p.counts = counts;
  p.total = total;
  p.zero_classes = zero;
  p.pi.resize(static_cast<size_t>(n));
  double c_total = static_cast<double>(total);
  for (int64_t i = 0; i < n; ++i) {
    if (counts[static_cast<size_t>(i)] > 0) {
      double raw = static_cast<double>(counts[static_cast<size_t>(i)]) / c_total;
      if (zero > 0) {
        raw -= 1.0 / (static_cast<double>(n - zero) * c_total);
      }
      p.pi[static_cast<size_t>(i)] = raw;
    } else {
      p.pi[static_cast<size_t>(i)] = 1.0 / (static_cast<double>(zero) * c_total);
    }
  }
  p.log_pi.resize(p.pi.size());
  for (size_t i = 0; i < p.pi.size(); ++i) {
    if (!(p.pi[i] > 0.0)) {
      throw NumericError("smoothed prior is not strictly positive; class counts "
                         "are too concentrated for this vocabulary size");
    }
    p.log_pi[i] = std::log(p.pi[i]);
  }
  return p;
}

ClassPriors EstimatePriors(const std::vector<std::vector<int>>& sequences,
                           int64_t num_classes) {
  std::vector<int64_t> counts(static_cast<size_t>(num_classes), 0);
  for (const auto& seq : sequences) {
    for (int id : seq) {
      if (id < 0 || id >= num_classes) {
        throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                        std::to_string(num_classes));
      }
      ++counts[static_cast<size_t>(id)];
    }
  }
  return PriorsFromCounts(counts);
}

namespace {

// Extended label z = [blank, y1, blank, y2, ..., yU, blank].
inline int ExtendedLabel(std::span<const int> targets, int blank, int64_t s) {
  return (s % 2 == 0) ? blank : targets[static_cast<size_t>(s / 2)];
}

}  // namespace

Tensor CtcLoss(const Tensor& log_probs, std::span<const int> targets, int blank,
               int64_t* infeasible_counter) {
  if (log_probs.rank() != 2) {
    throw DimensionError("ctc: log_probs must be [T x K], got " + log_probs.ShapeString());
  }
  int64_t frames = log_probs.dim(0);
  int64_t k = log_probs.dim(1);
  if (blank < 0 || blank >= k) throw ContractError("ctc: blank id out of range");
  for (int y : targets) {
    if (y < 0 || y >= k || y == blank) {
      throw ContractError("ctc: target id " + std::to_string(y) + " invalid");
    }
  }
  int64_t s_len = 2 * static_cast<int64_t>(targets.size()) + 1;
  const auto& lp = log_probs.data();
  auto at = [&](int64_t t, int label) { return lp[static_cast<size_t>(t * k + label)]; };

  auto alpha = std::make_shared<std::vector<double>>(
      static_cast<size_t>(frames * s_len), kLogZero);
  auto a = [&](int64_t t, int64_t s) -> double& {
    return (*alpha)[static_cast<size_t>(t * s_len + s)];
  };
  a(0, 0) = at(0, blank);
  if (s_len > 1) a(0, 1) = at(0, ExtendedLabel(targets, blank, 1));
  for (int64_t t = 1; t < frames; ++t) {
    for (int64_t s = 0; s < s_len; ++s) {
      int label = ExtendedLabel(targets, blank, s);
      double acc = a(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, a(t - 1, s - 1));
      if (s >= 2 && label != blank && label != ExtendedLabel(targets, blank, s - 2)) {
        acc = LogAdd(acc, a(t - 1, s - 2));
      }
      if (acc != kLogZero) a(t, s) = acc + at(t, label);
    }
  }
  double log_total = a(frames - 1, s_len - 1);
  if (s_len > 1) log_total = LogAdd(log_total, a(frames - 1, s_len - 2));

  if (log_total == kLogZero) {
    // No alignment fits (target too long for the frame count).
    if (infeasible_counter != nullptr) ++(*infeasible_counter);
    return Tensor::Scalar(std::numeric_limits<double>::infinity());
  }

  Tensor result = Tensor::Scalar(-log_total);

  GradTape* tape = GradTape::Active();
  if (tape != nullptr && log_probs.requires_grad()) {
    // Backward variables, emission at t included (alpha*beta counts it twice).
    auto beta = std::make_shared<std::vector<double>>(
        static_cast<size_t>(frames * s_len), kLogZero);
    auto b = [&](int64_t t, int64_t s) -> double& {
      return (*beta)[static_cast<size_t>(t * s_len + s)];
    };
    b(frames - 1, s_len - 1) = at(frames - 1, blank);
    if (s_len > 1) {
      b(frames - 1, s_len - 2) = at(frames - 1, ExtendedLabel(targets, blank, s_len - 2));
    }
    for (int64_t t = frames - 2; t >= 0; --t) {
      for (int64_t s = 0; s < s_len; ++s) {
        int label = ExtendedLabel(targets, blank, s);
        double acc = b(t + 1, s);
        if (s + 1 < s_len) acc = LogAdd(acc, b(t + 1, s + 1));
        if (s + 2 < s_len && label != blank &&
            label != ExtendedLabel(targets, blank, s + 2)) {
          acc = LogAdd(acc, b(t + 1, s + 2));
        }
        if (acc != kLogZero) b(t, s) = acc + at(t, label);
      }
    }

    int input_node = tape->NodeFor(log_probs);
    std::vector<int> saved_targets(targets.begin(), targets.end());
    Tensor saved_lp = log_probs;
    int node = tape->Record(
        {input_node}, result.shape(),
        [input_node, alpha, beta, saved_targets, saved_lp, frames, k, s_len, blank,
         log_total](GradTape& t, int self) {
          double g = t.GradData(self)[0];
          const auto& lp = saved_lp.data();
          std::vector<double> dlp(static_cast<size_t>(frames * k), 0.0);
          std::span<const int> tgt(saved_targets);
          for (int64_t fr = 0; fr < frames; ++fr) {
            // Accumulate log-sum of alpha+beta per label at this frame.
            std::vector<double> lse(static_cast<size_t>(k), kLogZero);
            for (int64_t s = 0; s < s_len; ++s) {
              double ab = (*alpha)[static_cast<size_t>(fr * s_len + s)] +
                          (*beta)[static_cast<size_t>(fr * s_len + s)];
              if (ab == kLogZero || std::isnan(ab)) continue;
              int label = ExtendedLabel(tgt, blank, s);
              lse[static_cast<size_t>(label)] = LogAdd(lse[static_cast<size_t>(label)], ab);
            }
            for (int64_t c = 0; c < k; ++c) {
              if (lse[static_cast<size_t>(c)] == kLogZero) continue;
              double d = -std::exp(lse[static_cast<size_t>(c)] -
                                   lp[static_cast<size_t>(fr * k + c)] - log_total);
              dlp[static_cast<size_t>(fr * k + c)] = g * d;
            }
          }
          t.AccumGrad(input_node, dlp);
        });
    tape->Bind(result, node);
  }
  return result;
}

Tensor AttentionLoss(const Tensor& logits, std::span<const int> targets,
                     double epsilon_ls, KlDirection direction) {
  if (logits.rank() != 2) {
    throw DimensionError("attention_loss: logits must be [U x V]");
  }
  int64_t steps = logits.dim(0);
  int64_t v = logits.dim(1);
  if (static_cast<int64_t>(targets.size()) != steps) {
    throw DimensionError("attention_loss: " + std::to_string(targets.size()) +
                         " targets vs " + std::to_string(steps) + " logit rows");
  }
  if (epsilon_ls < 0.0 || epsilon_ls >= 1.0) {
    throw ConfigError("attention_loss: label smoothing must be in [0, 1)");
  }

  // Smoothed labels: (1 - eps) on the target plus eps/V everywhere.
  double off = epsilon_ls / static_cast<double>(v);
  std::vector<double> label(static_cast<size_t>(steps * v), off);
  for (int64_t u = 0; u < steps; ++u) {
    int y = targets[static_cast<size_t>(u)];
    if (y < 0 || y >= v) throw ContractError("attention_loss: target out of range");
    label[static_cast<size_t>(u * v + y)] += 1.0 - epsilon_ls;
  }

  if (direction == KlDirection::kLabelToModel) {
    // mean_u sum_k p_y (log p_y - log p_attn); the entropy term is constant.
    double entropy_term = 0.0;
    for (double p : label) {
      if (p > 0.0) entropy_term += p * std::log(p);
    }
    entropy_term /= static_cast<double>(steps);
    Tensor label_t = Tensor::FromData({steps, v}, std::move(label));
    Tensor lp = LogSoftmax(logits);
    Tensor cross = Scale(Sum(Mul(label_t, lp)), -1.0 / static_cast<double>(steps));
    return AddScalar(cross, entropy_term);
  }

  // Literal direction: mean_u sum_k p_attn (log p_attn - log p_y).
  std::vector<double> log_label(label.size());
  for (size_t i = 0; i < label.size(); ++i) log_label[i] = std::log(label[i]);
  Tensor log_label_t = Tensor::FromData({steps, v}, std::move(log_label));
  Tensor p = Softmax(logits);
  Tensor lp = LogSoftmax(logits);
  return Scale(Sum(Mul(p, Sub(lp, log_label_t))), 1.0 / static_cast<double>(steps));
}

Tensor MtlLoss(const Tensor& ctc_loss, const Tensor& attn_loss, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("mtl: lambda must be in [0, 1]");
  return Add(Scale(ctc_loss, lambda), Scale(attn_loss, 1.0 - lambda));
}

Tensor AdjustLogits(const Tensor& logits, const ClassPriors& priors, double tau) {
  if (tau < 0.0) throw ConfigError("adjust_logits: tau must be >= 0");
  if (tau == 0.0) return logits;
  int64_t v = logits.shape().back();
  if (v != priors.num_classes()) {
    throw DimensionError("adjust_logits: " + std::to_string(v) + " logits vs " +
                         std::to_string(priors.num_classes()) + " priors");
  }
  std::vector<double> offset(static_cast<size_t>(v));
  for (int64_t i = 0; i < v; ++i) offset[static_cast<size_t>(i)] = -tau * priors.log_pi[static_cast<size_t>(i)];
  Tensor offset_t = Tensor::FromData({v}, std::move(offset));
  if (logits.rank() == 1) return Add(logits, offset_t);
  if (logits.rank() == 2) return AddRowBroadcast(logits, offset_t);
  throw DimensionError("adjust_logits: expected rank 1 or 2");
}

int ScheduledSample(std::span<const double> step_dist, int gold_token, double mix_prob,
                    Rng& rng) {
  if (mix_prob < 0.0 || mix_prob > 1.0) {
    throw ConfigError("scheduled_sample: mix probability must be in [0, 1]");
  }
  bool take_model = false;
  if (mix_prob > 0.0) take_model = rng.Uniform() < mix_prob;
  if (!take_model) return gold_token;
  size_t best = 0;
  for (size_t i = 1; i < step_dist.size(); ++i) {
    if (step_dist[i] > step_dist[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace a2
