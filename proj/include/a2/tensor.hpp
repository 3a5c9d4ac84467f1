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

#ifndef A2_TENSOR_HPP_
#define A2_TENSOR_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace a2 {

// Storage is always double; kF32 rounds every op result (and every tensor
// built through FromData) to the nearest float, so single-precision runs
// remain bit-reproducible while tests keep full double headroom.
enum class Precision { kF64, kF32 };

void SetDefaultPrecision(Precision p);
Precision GetDefaultPrecision();

class GradTape;

namespace internal {
// Shared across copies of one logical tensor so that every copy resolves to
// the same leaf node when a tape is recording.
struct GradMeta {
  uint64_t tape_epoch = 0;
  int node_id = -1;
};
}  // namespace internal

std::string ShapeStr(const std::vector<int64_t>& shape);

// Immutable dense row-major value. Copies share storage; a tensor without
// grad enabled never touches the tape.
class Tensor {
 public:
  Tensor() = default;

  static Tensor Scalar(double v);
  static Tensor Zeros(std::vector<int64_t> shape);
  static Tensor Full(std::vector<int64_t> shape, double v);
  static Tensor FromData(std::vector<int64_t> shape, std::vector<double> data);

  bool defined() const { return data_ != nullptr; }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t size() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }
  int64_t dim(int i) const;

  const std::vector<double>& data() const;
  double item() const;  // rank-0 or single-element only
  double At(int64_t i) const;
  double At(int64_t i, int64_t j) const;

  // Same storage, grad enabled (fresh tape binding).
  Tensor WithGrad() const;
  bool requires_grad() const { return meta_ != nullptr; }
  internal::GradMeta* meta() const { return meta_.get(); }

  std::string ShapeString() const { return ShapeStr(shape_); }

 private:
  friend class GradTape;
  std::vector<int64_t> shape_;
  std::shared_ptr<const std::vector<double>> data_;
  std::shared_ptr<internal::GradMeta> meta_;
};

// Reverse-mode tape. Nodes are appended in forward order (inputs always
// precede consumers); Backward walks them once in reverse. One tape per
// forward pass, confined to a single thread.
class GradTape {
 public:
  using BackwardFn = std::function<void(GradTape&, int self)>;

  GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  // Currently recording tape for this thread, or nullptr.
  static GradTape* Active();

  // Runs reverse accumulation from a scalar root on this tape. Gradients are
  // populated for every node reachable from the root; untouched nodes stay
  // absent (treated as zero by callers).
  void Backward(const Tensor& root);

  std::optional<Tensor> Grad(const Tensor& t) const;

  // --- recording API (used by op implementations) ---

  // Leaf node for a grad-enabled tensor; reuses the binding if this tensor
  // was already watched on this tape.
  int Watch(const Tensor& t);
  // Returns the node id for `t` or -1 when it does not participate.
  int NodeFor(const Tensor& t);
  int Record(std::vector<int> inputs, std::vector<int64_t> shape, BackwardFn fn);
  void Bind(Tensor& t, int node_id);

  // --- backward-pass API (used inside BackwardFn) ---
  const std::vector<double>& GradData(int node_id) const;
  void AccumGrad(int node_id, const std::vector<double>& g);
  void AccumGradAt(int node_id, int64_t flat_index, double g);
  void AccumGradRange(int node_id, int64_t offset, const double* g, int64_t count);

  size_t NumNodes() const { return nodes_.size(); }
  uint64_t epoch() const { return epoch_; }

 private:
  struct Node {
    std::vector<int> inputs;
    std::vector<int64_t> shape;
    BackwardFn backward;  // empty for leaves
  };
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  std::vector<char> has_grad_;
  uint64_t epoch_;
};

// RAII: makes a tape the active recorder on this thread.
class TapeScope {
 public:
  explicit TapeScope(GradTape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradTape* previous_;
};

// RAII: suspends recording (e.g. the prediction pass of scheduled sampling).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  GradTape* previous_;
};

}  // namespace a2

#endif  // A2_TENSOR_HPP_
