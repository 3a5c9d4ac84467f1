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

#include "a2/tensor.hpp"

#include <atomic>
#include <sstream>

#include "a2/error.hpp"

namespace a2 {

namespace {
Precision g_precision = Precision::kF64;
thread_local GradTape* t_active_tape = nullptr;
std::atomic<uint64_t> g_tape_epoch{1};

int64_t ShapeNumel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d <= 0) throw DimensionError("non-positive extent in shape " + ShapeStr(shape));
    n *= d;
  }
  return n;
}
}  // namespace

void SetDefaultPrecision(Precision p) { g_precision = p; }
Precision GetDefaultPrecision() { return g_precision; }

std::string ShapeStr(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor Tensor::Scalar(double v) { return FromData({}, {v}); }

Tensor Tensor::Zeros(std::vector<int64_t> shape) {
  int64_t n = ShapeNumel(shape);
  return FromData(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0));
}

Tensor Tensor::Full(std::vector<int64_t> shape, double v) {
  int64_t n = ShapeNumel(shape);
  return FromData(std::move(shape), std::vector<double>(static_cast<size_t>(n), v));
}

Tensor Tensor::FromData(std::vector<int64_t> shape, std::vector<double> data) {
  int64_t n = shape.empty() ? 1 : ShapeNumel(shape);
  if (n != static_cast<int64_t>(data.size())) {
    throw DimensionError("data length " + std::to_string(data.size()) +
                         " does not match shape " + ShapeStr(shape));
  }
  if (g_precision == Precision::kF32) {
    for (double& v : data) v = static_cast<double>(static_cast<float>(v));
  }
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::make_shared<const std::vector<double>>(std::move(data));
  return t;
}

int64_t Tensor::dim(int i) const {
  if (i < 0 || i >= static_cast<int>(shape_.size())) {
    throw DimensionError("dim index " + std::to_string(i) + " out of rank " +
                         std::to_string(shape_.size()));
  }
  return shape_[i];
}

const std::vector<double>& Tensor::data() const {
  if (!data_) throw ContractError("access to undefined tensor");
  return *data_;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + ShapeString());
  return (*data_)[0];
}

double Tensor::At(int64_t i) const {
  if (rank() != 1) throw DimensionError("At(i) on tensor of shape " + ShapeString());
  return (*data_)[static_cast<size_t>(i)];
}

double Tensor::At(int64_t i, int64_t j) const {
  if (rank() != 2) throw DimensionError("At(i,j) on tensor of shape " + ShapeString());
  return (*data_)[static_cast<size_t>(i * shape_[1] + j)];
}

Tensor Tensor::WithGrad() const {
  if (!data_) throw ContractError("WithGrad on undefined tensor");
  Tensor t = *this;
  t.meta_ = std::make_shared<internal::GradMeta>();
  return t;
}

// ---------------------------------------------------------------------------
// GradTape

GradTape::GradTape() : epoch_(g_tape_epoch.fetch_add(1)) {}

GradTape* GradTape::Active() { return t_active_tape; }

int GradTape::Watch(const Tensor& t) {
  internal::GradMeta* m = t.meta();
  if (m == nullptr) throw ContractError("Watch on a tensor without grad enabled");
  if (m->tape_epoch == epoch_ && m->node_id >= 0) return m->node_id;
  int id = Record({}, t.shape(), nullptr);
  m->tape_epoch = epoch_;
  m->node_id = id;
  return id;
}

int GradTape::NodeFor(const Tensor& t) {
  if (!t.requires_grad()) return -1;
  return Watch(t);
}

int GradTape::Record(std::vector<int> inputs, std::vector<int64_t> shape, BackwardFn fn) {
  nodes_.push_back(Node{std::move(inputs), std::move(shape), std::move(fn)});
  return static_cast<int>(nodes_.size()) - 1;
}

void GradTape::Bind(Tensor& t, int node_id) {
  auto meta = std::make_shared<internal::GradMeta>();
  meta->tape_epoch = epoch_;
  meta->node_id = node_id;
  t.meta_ = std::move(meta);
}

void GradTape::Backward(const Tensor& root) {
  if (root.size() != 1) {
    throw ContractError("Backward root must be scalar, got shape " + root.ShapeString());
  }
  internal::GradMeta* m = root.meta();
  if (m == nullptr || m->tape_epoch != epoch_ || m->node_id < 0) {
    throw ContractError("Backward root is not on this tape");
  }
  int root_id = m->node_id;

  grads_.assign(nodes_.size(), {});
  has_grad_.assign(nodes_.size(), 0);

  // Reachability from the root through input edges.
  std::vector<char> reachable(nodes_.size(), 0);
  std::vector<int> stack{root_id};
  reachable[static_cast<size_t>(root_id)] = 1;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    for (int in : nodes_[static_cast<size_t>(id)].inputs) {
      if (in >= 0 && !reachable[static_cast<size_t>(in)]) {
        reachable[static_cast<size_t>(in)] = 1;
        stack.push_back(in);
      }
    }
  }

  AccumGradAt(root_id, 0, 1.0);
  for (int id = root_id; id >= 0; --id) {
    const Node& node = nodes_[static_cast<size_t>(id)];
    if (!reachable[static_cast<size_t>(id)] || !node.backward) continue;
    if (!has_grad_[static_cast<size_t>(id)]) continue;
    node.backward(*this, id);
  }
}

std::optional<Tensor> GradTape::Grad(const Tensor& t) const {
  internal::GradMeta* m = t.meta();
  if (m == nullptr || m->tape_epoch != epoch_ || m->node_id < 0) return std::nullopt;
  size_t id = static_cast<size_t>(m->node_id);
  if (id >= grads_.size() || !has_grad_[id]) return std::nullopt;
  return Tensor::FromData(nodes_[id].shape, grads_[id]);
}

const std::vector<double>& GradTape::GradData(int node_id) const {
  return grads_[static_cast<size_t>(node_id)];
}

void GradTape::AccumGrad(int node_id, const std::vector<double>& g) {
  size_t id = static_cast<size_t>(node_id);
  std::vector<double>& dst = grads_[id];
  if (dst.empty()) {
    int64_t n = 1;
    for (int64_t d : nodes_[id].shape) n *= d;
    dst.assign(static_cast<size_t>(n), 0.0);
  }
  if (dst.size() != g.size()) throw ContractError("gradient size mismatch in accumulate");
  for (size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
  has_grad_[id] = 1;
}

void GradTape::AccumGradAt(int node_id, int64_t flat_index, double g) {
  size_t id = static_cast<size_t>(node_id);
  std::vector<double>& dst = grads_[id];
  if (dst.empty()) {
    int64_t n = 1;
    for (int64_t d : nodes_[id].shape) n *= d;
    dst.assign(static_cast<size_t>(n), 0.0);
  }
  dst[static_cast<size_t>(flat_index)] += g;
  has_grad_[id] = 1;
}

void GradTape::AccumGradRange(int node_id, int64_t offset, const double* g, int64_t count) {
  size_t id = static_cast<size_t>(node_id);
  std::vector<double>& dst = grads_[id];
  if (dst.empty()) {
    int64_t n = 1;
    for (int64_t d : nodes_[id].shape) n *= d;
    dst.assign(static_cast<size_t>(n), 0.0);
  }
  for (int64_t i = 0; i < count; ++i) dst[static_cast<size_t>(offset + i)] += g[i];
  has_grad_[id] = 1;
}

TapeScope::TapeScope(GradTape& tape) : previous_(t_active_tape) { t_active_tape = &tape; }
TapeScope::~TapeScope() { t_active_tape = previous_; }

NoGradScope::NoGradScope() : previous_(t_active_tape) { t_active_tape = nullptr; }
NoGradScope::~NoGradScope() { t_active_tape = previous_; }

}  // namespace a2
