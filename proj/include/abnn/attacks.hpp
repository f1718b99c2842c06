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

// l-infinity projected gradient attacks on stochastic classifiers.
//
// Both attacks ascend the cross-entropy of the true label:
//
//   x_{t+1} = P(x_t + eta * step(g_t))
//
// where P clamps into [x - gamma, x + gamma] intersected with the data
// range. Naive PGD uses the gradient under a single fresh noise draw per
// step; averaged PGD uses the mean gradient over m_grad draws. Each example
// is attacked on its own rng stream derived from (seed, example index), so
// results do not depend on the thread count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abnn/model.hpp"
#include "abnn/rng.hpp"
#include "abnn/tensor.hpp"

namespace abnn {

enum class StepRule { kSign, kRaw };
enum class AttackKind { kNaive, kAveraged };

const char* to_string(StepRule rule);
StepRule step_rule_from_string(const std::string& name);
const char* to_string(AttackKind kind);
AttackKind attack_kind_from_string(const std::string& name);

struct AttackConfig {
  double gamma = 0.035;
  // Non-positive means the default 2.5 * gamma / steps.
  double eta = 0.0;
  std::size_t steps = 150;
  std::size_t m_grad = 10;
  bool random_start = true;
  StepRule step_rule = StepRule::kSign;
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void validate() const;
  double resolved_eta() const;
  bool operator==(const AttackConfig&) const = default;
};

struct EnsembleEval {
  std::size_t m_eval = 40;
  std::uint64_t seed = 0;
  EnsembleMode mode = EnsembleMode::kProbabilities;
  unsigned threads = 0;
};

struct AttackOptions {
  // When set, AttackResult::success is filled from ensemble predictions.
  std::optional<EnsembleEval> evaluate;
  bool record_trajectory = false;
  // Ascending step counts at which the iterate is captured.
  std::vector<std::size_t> snapshot_steps;
};

struct AttackResult {
  Tensor adversarial;                  // same shape as the clean inputs
  std::vector<std::uint8_t> success;   // ensemble misclassification
  std::vector<double> loss_trace;      // mean loss at x_t, t = 0..steps-1
  std::vector<Tensor> trajectory;      // x_0..x_T when recorded
  std::vector<Tensor> snapshots;       // one per snapshot step

  double success_rate() const;
};

Tensor project_linf(const Tensor& xhat, const Tensor& x, const AttackConfig& cfg);

// Gradient of the summed cross-entropy w.r.t. x under one noise draw.
Tensor input_gradient(const StochasticModel& model, const Tensor& x,
                      std::span<const int> labels, const NoiseVector& eps,
                      double* loss = nullptr);

// One stochastic gradient sample at x; may write the sample's loss.
using SampleGradient = std::function<Tensor(const Tensor& x, Rng& rng, double* loss)>;

// (1/m) * sum of m samples; mean_loss receives the mean sample loss.
Tensor average_gradient(const SampleGradient& sample, const Tensor& x,
                        std::size_t m, Rng& rng, double* mean_loss = nullptr);

Tensor avg_input_grad(const StochasticModel& model, const Tensor& x,
                      std::span<const int> labels, std::size_t m_grad, Rng& rng,
                      double* mean_loss = nullptr);

AttackResult naive_pgd(const StochasticModel& model, const Tensor& x,
                       std::span<const int> labels, const AttackConfig& cfg,
                       const AttackOptions& options = {});

AttackResult averaged_pgd(const StochasticModel& model, const Tensor& x,
                          std::span<const int> labels, const AttackConfig& cfg,
                          const AttackOptions& options = {});

AttackResult run_attack(AttackKind kind, const StochasticModel& model,
                        const Tensor& x, std::span<const int> labels,
                        const AttackConfig& cfg, const AttackOptions& options = {});

// Per-example ensemble argmax; example i uses the stream (seed, i).
std::vector<int> ensemble_predictions(const StochasticModel& model,
                                      const Tensor& x, const EnsembleEval& eval);

std::vector<std::uint8_t> evaluate_attack_success(const StochasticModel& model,
                                                  const Tensor& adversarial,
                                                  std::span<const int> labels,
                                                  const EnsembleEval& eval);

}  // namespace abnn
