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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "abnn/attacks.hpp"
#include "abnn/dataset.hpp"
#include "abnn/model.hpp"

namespace abnn {

// adv_training: deterministic net on naive-PGD examples.
// adv_bnn_naive: variational net on naive-PGD examples.
// adv_bnn_apgd: variational net on averaged-PGD examples.
enum class DefenseKind { kAdvTraining, kAdvBnnNaive, kAdvBnnApgd };

const char* to_string(DefenseKind kind);
DefenseKind defense_kind_from_string(const std::string& name);
bool defense_is_stochastic(DefenseKind kind);
AttackKind inner_attack_kind(DefenseKind kind);

enum class OptimizerKind { kSgdMomentum, kAdam };

const char* to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const OptimizerConfig&) const = default;
};

struct OptimizerState {
  std::size_t step = 0;
  std::vector<std::vector<double>> first;   // momentum buffer / Adam m
  std::vector<std::vector<double>> second;  // Adam v
};

// Replaces each params[i] with its updated value; requires_grad marks are
// carried over.
void optimizer_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                    OptimizerState& state, const OptimizerConfig& cfg);

struct TrainConfig {
  DefenseKind defense = DefenseKind::kAdvBnnNaive;
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  OptimizerConfig optimizer;
  double kl_weight = 1.0;
  AttackConfig inner_attack;
  std::uint64_t seed = 0;
  // Held-out probe evaluated after every epoch; 0 disables it.
  std::size_t probe_size = 200;
  std::size_t probe_m_eval = 10;
  unsigned threads = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Adam at 1e-3 for variational nets, SGD with momentum 0.9 for the
// deterministic baseline; 10-step inner attacks.
TrainConfig default_train_config(DefenseKind kind);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double clean_accuracy = 0.0;
  double robust_accuracy = 0.0;
};

struct TrainCounters {
  std::size_t attack_calls = 0;
  std::size_t optimizer_steps = 0;
};

struct TrainHooks {
  std::function<void(std::size_t epoch, std::size_t batch, const Tensor& clean,
                     const Tensor& adversarial)>
      on_adversarial_batch;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  StochasticModel model;
  std::vector<EpochMetrics> metrics;
  TrainCounters counters;
};

// probe may be null, in which case the first probe_size training examples
// are used.
TrainResult train_defense(StochasticModel model, const Dataset& train,
                          const TrainConfig& cfg, const Dataset* probe = nullptr,
                          const TrainHooks& hooks = {});

}  // namespace abnn
