// Copyright 2026 The abnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abnn/tensor.hpp"

#include <cstring>
#include <sstream>
#include <unordered_map>

namespace abnn {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kDTypeMismatch: return "dtype mismatch";
    case ErrorCode::kNoTrace: return "no trace";
    case ErrorCode::kNonScalarLoss: return "non-scalar loss";
    case ErrorCode::kNoiseMismatch: return "noise mismatch";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kTruncated: return "truncated input";
    case ErrorCode::kCountMismatch: return "count mismatch";
    case ErrorCode::kUnsupportedVersion: return "unsupported version";
    case ErrorCode::kMissingProvenance: return "missing provenance";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kModelMismatch: return "model mismatch";
  }
  return "unknown error";
}

const char* to_string(DType dtype) {
  return dtype == DType::kFloat32 ? "float32" : "float64";
}

DType dtype_from_string(const std::string& name) {
  if (name == "float32") return DType::kFloat32;
  if (name == "float64") return DType::kFloat64;
  fail(ErrorCode::kInvalidArgument, "unknown dtype '" + name + "'");
}

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

Buffer make_buffer(DType dtype, std::size_t n, double fill) {
  if (dtype == DType::kFloat32) {
    return std::vector<float>(n, static_cast<float>(fill));
  }
  return std::vector<double>(n, fill);
}

namespace {

DType buffer_dtype(const Buffer& b) {
  return std::holds_alternative<std::vector<float>>(b) ? DType::kFloat32
                                                       : DType::kFloat64;
}

std::size_t buffer_size(const Buffer& b) {
  return std::visit([](const auto& v) { return v.size(); }, b);
}

}  // namespace
}  // namespace detail

void Tensor::require_defined() const {
  if (!impl_) fail(ErrorCode::kInvalidArgument, "use of an undefined tensor");
}

Tensor Tensor::from_buffer(const Shape& shape, detail::Buffer buffer) {
  for (auto d : shape) {
    if (d == 0) {
      fail(ErrorCode::kShapeMismatch,
           "tensor shape " + to_string(shape) + " has a zero dimension");
    }
  }
  if (abnn::numel(shape) != detail::buffer_size(buffer)) {
    fail(ErrorCode::kShapeMismatch,
         "shape " + to_string(shape) + " does not match " +
             std::to_string(detail::buffer_size(buffer)) + " values");
  }
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = shape;
  impl->dtype = detail::buffer_dtype(buffer);
  impl->data = std::make_shared<const detail::Buffer>(std::move(buffer));
  return Tensor(std::move(impl));
}

Tensor Tensor::zeros(const Shape& shape, DType dtype) {
  return from_buffer(shape, detail::make_buffer(dtype, abnn::numel(shape)));
}

Tensor Tensor::full(const Shape& shape, double value, DType dtype) {
  return from_buffer(shape,
                     detail::make_buffer(dtype, abnn::numel(shape), value));
}

Tensor Tensor::scalar(double value, DType dtype) {
  return full({1}, value, dtype);
}

Tensor Tensor::from_values(const Shape& shape, std::span<const double> values,
                           DType dtype) {
  if (dtype == DType::kFloat64) {
    return from_buffer(shape,
                       std::vector<double>(values.begin(), values.end()));
  }
  std::vector<float> v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    v[i] = static_cast<float>(values[i]);
  }
  return from_buffer(shape, std::move(v));
}

Tensor Tensor::from_values(const Shape& shape,
                           std::initializer_list<double> values, DType dtype) {
  return from_values(shape, std::span<const double>(values.begin(), values.size()),
                     dtype);
}

const Shape& Tensor::shape() const {
  require_defined();
  return impl_->shape;
}

std::size_t Tensor::numel() const { return abnn::numel(shape()); }

DType Tensor::dtype() const {
  require_defined();
  return impl_->dtype;
}

double Tensor::at(std::size_t i) const {
  require_defined();
  if (i >= numel()) {
    fail(ErrorCode::kInvalidArgument,
         "index " + std::to_string(i) + " out of range for shape " +
             to_string(shape()));
  }
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); },
                    *impl_->data);
}

double Tensor::item() const {
  if (numel() != 1) {
    fail(ErrorCode::kShapeMismatch,
         "item() on tensor of shape " + to_string(shape()));
  }
  return at(0);
}

std::vector<double> Tensor::to_vector() const {
  require_defined();
  return std::visit(
      [](const auto& v) { return std::vector<double>(v.begin(), v.end()); },
      *impl_->data);
}

Tensor& Tensor::set_requires_grad(bool value) {
  require_defined();
  impl_->requires_grad = value;
  impl_->tracked = value;
  return *this;
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
bool Tensor::tracked() const { return impl_ && impl_->tracked; }

bool Tensor::has_grad() const { return impl_ && impl_->grad.has_value(); }

Tensor Tensor::grad() const {
  if (!has_grad()) fail(ErrorCode::kInvalidArgument, "tensor has no gradient");
  return from_buffer(impl_->shape, *impl_->grad);
}

void Tensor::clear_grad() {
  if (impl_) impl_->grad.reset();
}

Tensor Tensor::detach() const {
  require_defined();
  auto impl = std::make_shared<detail::TensorImpl>();
  impl->shape = impl_->shape;
  impl->dtype = impl_->dtype;
  impl->data = impl_->data;
  return Tensor(std::move(impl));
}

Tensor Tensor::cast(DType dtype) const {
  require_defined();
  if (dtype == impl_->dtype) return detach();
  auto values = to_vector();
  return from_values(impl_->shape, values, dtype);
}

bool Tensor::same_storage(const Tensor& other) const {
  return impl_ && other.impl_ && impl_->data == other.impl_->data;
}

bool Tensor::bit_equal(const Tensor& other) const {
  if (!defined() || !other.defined()) return defined() == other.defined();
  if (shape() != other.shape() || dtype() != other.dtype()) return false;
  return std::visit(
      [&](const auto& a) {
        using V = std::decay_t<decltype(a)>;
        const auto& b = std::get<V>(*other.impl_->data);
        return std::memcmp(a.data(), b.data(),
                           a.size() * sizeof(typename V::value_type)) == 0;
      },
      *impl_->data);
}

namespace {
thread_local Trace* g_active_trace = nullptr;
}  // namespace

Trace* Trace::active() { return g_active_trace; }

TraceScope::TraceScope(Trace& trace) : previous_(g_active_trace) {
  g_active_trace = &trace;
}

TraceScope::~TraceScope() { g_active_trace = previous_; }

std::vector<std::string> Trace::op_names() const {
  std::vector<std::string> names;
  names.reserve(nodes_.size());
  for (const auto& n : nodes_) names.emplace_back(n.name);
  return names;
}

bool Trace::replay_matches() const {
  for (const auto& node : nodes_) {
    detail::Buffer again = node.recompute();
    if (again != *node.output->data) return false;
  }
  return true;
}

Tensor Trace::emit(const char* name, std::vector<Tensor> inputs,
                   const Shape& out_shape, detail::Buffer out,
                   ForwardFn recompute, BackwardFn backward_fn) {
  Tensor result = Tensor::from_buffer(out_shape, std::move(out));
  Trace* trace = active();
  if (trace == nullptr || trace->consumed_) return result;
  bool any_tracked = false;
  for (const auto& t : inputs) any_tracked = any_tracked || t.tracked();
  if (!any_tracked) return result;

  result.impl_->tracked = true;
  Node node{name, {}, result.impl_, std::move(recompute),
            std::move(backward_fn)};
  node.inputs.reserve(inputs.size());
  for (auto& t : inputs) node.inputs.push_back(t.impl_);
  trace->nodes_.push_back(std::move(node));
  return result;
}

void backward(const Tensor& loss, Trace& trace) {
  if (!loss.defined()) fail(ErrorCode::kInvalidArgument, "undefined loss");
  if (loss.numel() != 1) {
    fail(ErrorCode::kNonScalarLoss,
         "backward needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  if (trace.consumed_) {
    fail(ErrorCode::kNoTrace, "trace was already consumed by a backward pass");
  }
  if (trace.nodes_.empty() || !loss.tracked()) {
    fail(ErrorCode::kNoTrace,
         "backward without a trace: loss was not recorded on this trace");
  }
  const detail::TensorImpl* loss_impl = loss.impl_ptr().get();
  bool recorded = false;
  for (const auto& n : trace.nodes_) recorded = recorded || n.output.get() == loss_impl;
  if (!recorded) {
    fail(ErrorCode::kNoTrace, "loss was produced outside this trace");
  }

  std::unordered_map<const detail::TensorImpl*, detail::Buffer> grads;
  std::unordered_map<const detail::TensorImpl*, std::shared_ptr<detail::TensorImpl>>
      leaves;
  grads.emplace(loss_impl, detail::make_buffer(loss.dtype(), 1, 1.0));
  trace.backward_evaluations_ = 0;

  std::vector<detail::Buffer*> slots;
  for (auto it = trace.nodes_.rbegin(); it != trace.nodes_.rend(); ++it) {
    auto found = grads.find(it->output.get());
    if (found == grads.end()) continue;
    slots.assign(it->inputs.size(), nullptr);
    for (std::size_t i = 0; i < it->inputs.size(); ++i) {
      const auto& in = it->inputs[i];
      if (!in->tracked) continue;
      auto [slot, inserted] = grads.try_emplace(in.get());
      if (inserted) {
        slot->second = detail::make_buffer(in->dtype, abnn::numel(in->shape));
      }
      if (in->requires_grad) leaves.emplace(in.get(), in);
      slots[i] = &slot->second;
    }
    it->backward(found->second, slots);
    ++trace.backward_evaluations_;
  }

  for (auto& [ptr, impl] : leaves) impl->grad = std::move(grads.at(ptr));
  trace.nodes_.clear();
  trace.consumed_ = true;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& fn,
                        const Tensor& at, double step) {
  if (!(step > 0)) fail(ErrorCode::kInvalidArgument, "step must be positive");
  std::vector<double> base = at.to_vector();
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    std::vector<double> plus = base, minus = base;
    plus[i] += step;
    minus[i] -= step;
    double fp = fn(Tensor::from_values(at.shape(), plus, at.dtype()));
    double fm = fn(Tensor::from_values(at.shape(), minus, at.dtype()));
    out[i] = (fp - fm) / (2.0 * step);
  }
  return Tensor::from_values(at.shape(), out, at.dtype());
}

}  // namespace abnn
