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

// Dense row-major tensors with a tape-based reverse-mode differentiator.
//
// Every primitive in ops.hpp records itself on the thread's active Trace
// when at least one of its inputs is tracked (marked with requires_grad, or
// produced by a recorded primitive). backward() walks the tape once in
// reverse and writes gradients into the grad slot of every marked tensor.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "abnn/error.hpp"

namespace abnn {

enum class DType : std::uint8_t { kFloat32 = 0, kFloat64 = 1 };

const char* to_string(DType dtype);
DType dtype_from_string(const std::string& name);

template <class T>
inline constexpr DType dtype_of =
    std::is_same_v<T, float> ? DType::kFloat32 : DType::kFloat64;

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// Calls fn.template operator()<T>() with T matching dtype.
template <class F>
decltype(auto) dispatch(DType dtype, F&& fn) {
  if (dtype == DType::kFloat32) return fn.template operator()<float>();
  return fn.template operator()<double>();
}

namespace detail {

using Buffer = std::variant<std::vector<float>, std::vector<double>>;

Buffer make_buffer(DType dtype, std::size_t n, double fill = 0.0);

struct TensorImpl {
  Shape shape;
  DType dtype = DType::kFloat32;
  std::shared_ptr<const Buffer> data;
  std::optional<Buffer> grad;
  bool requires_grad = false;
  bool tracked = false;
};

}  // namespace detail

class Trace;

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, DType dtype);
  static Tensor full(const Shape& shape, double value, DType dtype);
  static Tensor scalar(double value, DType dtype);
  // Values are converted to dtype.
  static Tensor from_values(const Shape& shape, std::span<const double> values,
                            DType dtype);
  static Tensor from_values(const Shape& shape,
                            std::initializer_list<double> values,
                            DType dtype = DType::kFloat64);
  template <class T>
  static Tensor from_vector(const Shape& shape, std::vector<T> values);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  DType dtype() const;

  // Throws kDTypeMismatch when T does not match dtype().
  template <class T>
  std::span<const T> data() const;

  double at(std::size_t flat_index) const;
  double item() const;
  std::vector<double> to_vector() const;

  // Marks (or unmarks) this tensor as a differentiation target.
  Tensor& set_requires_grad(bool value = true);
  bool requires_grad() const;
  bool tracked() const;

  bool has_grad() const;
  // Gradient slot as an untracked tensor; throws when no gradient is present.
  Tensor grad() const;
  void clear_grad();

  // Same storage, never tracked, no grad slot.
  Tensor detach() const;
  Tensor cast(DType dtype) const;

  bool same_storage(const Tensor& other) const;
  bool bit_equal(const Tensor& other) const;

  const detail::TensorImpl& impl() const { return *impl_; }
  std::shared_ptr<detail::TensorImpl> impl_ptr() const { return impl_; }

  static Tensor from_buffer(const Shape& shape, detail::Buffer buffer);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  void require_defined() const;

  std::shared_ptr<detail::TensorImpl> impl_;

  friend class Trace;
};

template <class T>
Tensor Tensor::from_vector(const Shape& shape, std::vector<T> values) {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return from_buffer(shape, detail::Buffer(std::move(values)));
}

template <class T>
std::span<const T> Tensor::data() const {
  require_defined();
  const auto* vec = std::get_if<std::vector<T>>(impl_->data.get());
  if (vec == nullptr) {
    fail(ErrorCode::kDTypeMismatch,
         std::string("tensor holds ") + to_string(impl_->dtype) +
             ", accessed as " + to_string(dtype_of<T>));
  }
  return {vec->data(), vec->size()};
}

// Ordered record of traced primitives. Confined to the thread that created
// it; consumed by exactly one backward pass.
class Trace {
 public:
  // Accumulates into grads[i] (null for untracked inputs).
  using BackwardFn = std::function<void(const detail::Buffer& grad_out,
                                        std::span<detail::Buffer* const> grads)>;
  using ForwardFn = std::function<detail::Buffer()>;

  Trace() = default;
  Trace(const Trace&) = delete;
  Trace& operator=(const Trace&) = delete;

  static Trace* active();

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }
  std::vector<std::string> op_names() const;
  // Number of local-derivative evaluations performed by the last backward.
  std::size_t backward_evaluations() const { return backward_evaluations_; }

  // Recomputes every recorded output from its inputs and compares bits.
  bool replay_matches() const;

  // Used by primitives; produces the output tensor and, when needed, the
  // tape entry.
  static Tensor emit(const char* name, std::vector<Tensor> inputs,
                     const Shape& out_shape, detail::Buffer out,
                     ForwardFn recompute, BackwardFn backward);

 private:
  struct Node {
    const char* name;
    std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
    std::shared_ptr<detail::TensorImpl> output;
    ForwardFn recompute;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
  std::size_t backward_evaluations_ = 0;

  friend void backward(const Tensor& loss, Trace& trace);
};

// Activates a trace on the current thread for the lifetime of the scope.
class TraceScope {
 public:
  explicit TraceScope(Trace& trace);
  ~TraceScope();
  TraceScope(const TraceScope&) = delete;
  TraceScope& operator=(const TraceScope&) = delete;

 private:
  Trace* previous_;
};

// Populates the grad slot of every marked tensor reachable from loss.
void backward(const Tensor& loss, Trace& trace);

// Central differences, evaluated in the dtype of `at`.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& fn,
                        const Tensor& at, double step);

}  // namespace abnn
