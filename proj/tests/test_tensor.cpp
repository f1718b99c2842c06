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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "abnn/error.hpp"
#include "abnn/ops.hpp"
#include "abnn/tensor.hpp"
#include "test_support.hpp"

namespace abnn {
namespace {

using testing::random_tensor;

template <class Fn>
void expect_code(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected error " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

TEST(Tensor, ShapeAndStorageInvariants) {
  Tensor t = Tensor::zeros({2, 3}, DType::kFloat32);
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_EQ(t.data<float>().size(), 6u);
  EXPECT_EQ(t.dtype(), DType::kFloat32);
  expect_code(ErrorCode::kDTypeMismatch, [&] { (void)t.data<double>(); });
  expect_code(ErrorCode::kShapeMismatch, [] { Tensor::zeros({2, 0}, DType::kFloat64); });
  expect_code(ErrorCode::kShapeMismatch, [] { Tensor::from_values({2, 2}, {1.0, 2.0, 3.0}); });
}

TEST(Tensor, DetachSharesStorageWithoutTracking) {
  Tensor t = Tensor::from_values({2}, {1.0, 2.0});
  t.set_requires_grad();
  Tensor d = t.detach();
  EXPECT_TRUE(d.same_storage(t));
  EXPECT_FALSE(d.requires_grad());
  EXPECT_FALSE(d.tracked());
}

TEST(Ops, TrivialValues) {
  EXPECT_NEAR(ops::softplus(Tensor::from_values({1}, {0.0})).item(), std::log(2.0), 1e-15);
  EXPECT_EQ(ops::relu(Tensor::from_values({1}, {-3.5})).item(), 0.0);
  EXPECT_EQ(ops::relu(Tensor::from_values({1}, {2.0})).item(), 2.0);
  const int label = 0;
  Tensor ce = ops::cross_entropy_with_logits(Tensor::from_values({1, 2}, {0.0, 0.0}),
                                             std::span<const int>(&label, 1));
  EXPECT_NEAR(ce.item(), std::log(2.0), 1e-15);
}

TEST(Ops, CrossEntropyIsStableAtLargeLogits) {
  const int label = 1;
  Tensor ce = ops::cross_entropy_with_logits(Tensor::from_values({1, 2}, {1000.0, -1000.0}),
                                             std::span<const int>(&label, 1));
  EXPECT_TRUE(std::isfinite(ce.item()));
  EXPECT_NEAR(ce.item(), 2000.0, 1e-9);
  Tensor p = ops::softmax(Tensor::from_values({1, 2}, {1000.0, 999.0}, DType::kFloat32));
  EXPECT_NEAR(p.at(0) + p.at(1), 1.0, 1e-6);
}

TEST(Ops, ErrorsNameOperationAndShapes) {
  Tensor a = Tensor::zeros({2, 3}, DType::kFloat64);
  Tensor b = Tensor::zeros({2, 3}, DType::kFloat64);
  try {
    ops::matmul(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("matmul"), std::string::npos);
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
  }
  expect_code(ErrorCode::kDTypeMismatch,
              [&] { ops::add(a, Tensor::zeros({2, 3}, DType::kFloat32)); });
  expect_code(ErrorCode::kShapeMismatch,
              [&] { ops::add_bias(a, Tensor::zeros({2}, DType::kFloat64)); });
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  x.set_requires_grad();
  Trace trace;
  Tensor loss;
  {
    TraceScope scope(trace);
    loss = ops::sum(x);
  }
  backward(loss, trace);
  for (double g : x.grad().to_vector()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, ReluChainRule) {
  Tensor x = Tensor::from_values({1}, {3.0});
  x.set_requires_grad();
  Trace trace;
  Tensor loss;
  {
    TraceScope scope(trace);
    loss = ops::sum(ops::relu(ops::scale(x, 2.0)));
  }
  backward(loss, trace);
  EXPECT_EQ(x.grad().item(), 2.0);
}

TEST(Backward, ReluSubgradientAtZeroIsZero) {
  Tensor x = Tensor::from_values({1}, {0.0});
  x.set_requires_grad();
  Trace trace;
  Tensor loss;
  {
    TraceScope scope(trace);
    loss = ops::sum(ops::relu(x));
  }
  backward(loss, trace);
  EXPECT_EQ(x.grad().item(), 0.0);
}

TEST(Backward, ErrorsAndConsumption) {
  Tensor x = Tensor::from_values({2}, {1.0, 2.0});
  x.set_requires_grad();
  Trace trace;
  Tensor vec, loss;
  {
    TraceScope scope(trace);
    vec = ops::mul(x, x);
    loss = ops::sum(vec);
  }
  expect_code(ErrorCode::kNonScalarLoss, [&] { backward(vec, trace); });
  backward(loss, trace);
  EXPECT_TRUE(trace.consumed());
  expect_code(ErrorCode::kNoTrace, [&] { backward(loss, trace); });

  Trace empty;
  Tensor untraced = ops::sum(x);
  expect_code(ErrorCode::kNoTrace, [&] { backward(untraced, empty); });
}

TEST(Backward, UnmarkedTensorsUntouched) {
  Tensor x = Tensor::from_values({2}, {1.0, 2.0});
  Tensor w = Tensor::from_values({2}, {3.0, 4.0});
  x.set_requires_grad();
  Trace trace;
  Tensor loss;
  {
    TraceScope scope(trace);
    loss = ops::sum(ops::mul(x, w));
  }
  backward(loss, trace);
  EXPECT_TRUE(x.has_grad());
  EXPECT_FALSE(w.has_grad());
  EXPECT_EQ(x.grad().to_vector(), (std::vector<double>{3.0, 4.0}));
}

TEST(Backward, LinearInPrimitiveCount) {
  for (std::size_t k : {4u, 16u, 64u}) {
    Tensor x = Tensor::from_values({3}, {0.1, 0.2, 0.3});
    x.set_requires_grad();
    Trace trace;
    Tensor loss;
    {
      TraceScope scope(trace);
      Tensor h = x;
      for (std::size_t i = 0; i < k; ++i) h = ops::add_scalar(ops::scale(h, 0.9), 0.01);
      loss = ops::sum(h);
    }
    const std::size_t recorded = trace.size();
    EXPECT_EQ(recorded, 2 * k + 1);
    backward(loss, trace);
    EXPECT_LE(trace.backward_evaluations(), recorded);
  }
}

TEST(Backward, ReplayReproducesForwardBits) {
  std::mt19937_64 rng(3);
  Tensor x = random_tensor({4, 5}, -1, 1, DType::kFloat32, rng);
  Tensor w = random_tensor({5, 3}, -1, 1, DType::kFloat32, rng);
  Tensor b = random_tensor({3}, -1, 1, DType::kFloat32, rng);
  w.set_requires_grad();
  Trace trace;
  Tensor first;
  {
    TraceScope scope(trace);
    first = ops::softmax(ops::relu(ops::add_bias(ops::matmul(x, w), b)));
  }
  EXPECT_TRUE(trace.replay_matches());
  Tensor second = ops::softmax(ops::relu(ops::add_bias(ops::matmul(x, w), b)));
  EXPECT_TRUE(first.bit_equal(second));
}

TEST(FiniteDiff, ClosedForms) {
  Tensor at = Tensor::from_values({1}, {3.0});
  Tensor g = finite_diff_grad([](const Tensor& t) { return t.item() * t.item(); }, at, 1e-5);
  EXPECT_NEAR(g.item(), 6.0, 1e-6);
  Tensor v = Tensor::from_values({2, 2}, {0.1, -2, 3, 0.4});
  Tensor gs = finite_diff_grad([](const Tensor& t) { return ops::sum(t).item(); }, v, 1e-5);
  for (double e : gs.to_vector()) EXPECT_NEAR(e, 1.0, 1e-9);
  expect_code(ErrorCode::kInvalidArgument,
              [&] { finite_diff_grad([](const Tensor&) { return 0.0; }, at, 0.0); });
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

// Every smooth primitive against central differences at random points.
TEST(Backward, PrimitivesMatchFiniteDifferences) {
  std::mt19937_64 rng(11);
  const DType f64 = DType::kFloat64;
  const std::vector<int> labels{0, 2, 1};
  Tensor other = random_tensor({3, 3}, 0.5, 1.5, f64, rng);
  Tensor mat = random_tensor({3, 4}, -1, 1, f64, rng);
  Tensor bias = random_tensor({3}, -1, 1, f64, rng);
  using Unary = std::function<Tensor(const Tensor&)>;
  struct Case {
    std::string name;
    Unary fn;
    Shape shape{3, 3};
  };
  const std::vector<Case> cases{
      {"matmul", [&](const Tensor& t) { return ops::matmul(t, mat); }},
      {"matmul_rhs", [&](const Tensor& t) { return ops::matmul(other, t); }},
      {"add", [&](const Tensor& t) { return ops::add(t, other); }},
      {"sub", [&](const Tensor& t) { return ops::sub(other, t); }},
      {"mul", [&](const Tensor& t) { return ops::mul(t, other); }},
      {"add_bias", [&](const Tensor& t) { return ops::add_bias(t, bias); }},
      {"bias_arg", [&](const Tensor& t) { return ops::mul(ops::add_bias(other, t), other); }, {3}},
      {"scale", [&](const Tensor& t) { return ops::scale(t, -1.7); }},
      {"add_scalar", [&](const Tensor& t) { return ops::add_scalar(t, 0.3); }},
      {"relu", [&](const Tensor& t) { return ops::relu(t); }},
      {"softplus", [&](const Tensor& t) { return ops::softplus(t); }},
      {"exp", [&](const Tensor& t) { return ops::exp(t); }},
      {"log", [&](const Tensor& t) { return ops::log(ops::add_scalar(ops::mul(t, t), 0.5)); }},
      {"clamp", [&](const Tensor& t) { return ops::clamp(t, -0.5, 0.6); }},
      {"softmax", [&](const Tensor& t) { return ops::mul(ops::softmax(t), other); }},
      {"cross_entropy", [&](const Tensor& t) { return ops::cross_entropy_with_logits(t, labels); }},
      {"mean", [&](const Tensor& t) { return ops::mean(ops::mul(t, other)); }},
  };
  for (const auto& [name, fn, shape] : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      Tensor x = random_tensor(shape, -1, 1, f64, rng);
      // Keep away from kinks.
      std::vector<double> v = x.to_vector();
      for (auto& e : v) {
        if (std::abs(e) < 0.05 || std::abs(e + 0.5) < 0.05 || std::abs(e - 0.6) < 0.05) e += 0.13;
      }
      x = Tensor::from_values(shape, v, f64);
      x.set_requires_grad();
      Trace trace;
      Tensor loss;
      {
        TraceScope scope(trace);
        loss = ops::sum(fn(x));
      }
      backward(loss, trace);
      const auto analytic = x.grad().to_vector();
      const auto numeric = testing::ref_central_diff(
          [&](const std::vector<double>& p) {
            return ops::sum(fn(Tensor::from_values(shape, p, f64))).item();
          },
          v, 1e-6);
      for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_LE(rel_err(analytic[i], numeric[i]), 1e-4) << name << " coordinate " << i;
      }
    }
  }
}

}  // namespace
}  // namespace abnn
