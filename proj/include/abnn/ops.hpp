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

#pragma once

#include <span>

#include "abnn/tensor.hpp"

// Differentiable primitives. Operands must share a dtype; elementwise binary
// ops require identical shapes. The only broadcast is add_bias over the
// trailing axis.
namespace abnn::ops {

Tensor matmul(const Tensor& a, const Tensor& b);  // [m,k] x [k,n]
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_bias(const Tensor& a, const Tensor& bias);  // [m,n] + [n]
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

// Subgradient at 0 is 0.
Tensor relu(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
// Gradient passes where lo <= a <= hi.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor softmax(const Tensor& logits);  // row-wise over [m,n]
// Per-row loss, shape [m]; labels index columns of logits.
Tensor cross_entropy_with_logits(const Tensor& logits,
                                 std::span<const int> labels);

Tensor sum(const Tensor& a);   // shape [1]
Tensor mean(const Tensor& a);  // shape [1]

// Scalar helpers shared by kernels and tests.
double softplus_value(double x);
double sigmoid_value(double x);

}  // namespace abnn::ops
