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

#include "abnn/training.hpp"

#include <cmath>
#include <numeric>

#include "abnn/ops.hpp"

namespace abnn {

const char* to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kAdvTraining: return "adv_training";
    case DefenseKind::kAdvBnnNaive: return "adv_bnn_naive";
    case DefenseKind::kAdvBnnApgd: return "adv_bnn_apgd";
  }
  return "?";
}

DefenseKind defense_kind_from_string(const std::string& name) {
  if (name == "adv_training") return DefenseKind::kAdvTraining;
  if (name == "adv_bnn_naive") return DefenseKind::kAdvBnnNaive;
  if (name == "adv_bnn_apgd") return DefenseKind::kAdvBnnApgd;
  fail(ErrorCode::kInvalidArgument, "unknown defense kind '" + name + "'");
}

bool defense_is_stochastic(DefenseKind kind) { return kind != DefenseKind::kAdvTraining; }

AttackKind inner_attack_kind(DefenseKind kind) {
  return kind == DefenseKind::kAdvBnnApgd ? AttackKind::kAveraged : AttackKind::kNaive;
}

const char* to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd_momentum";
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd_momentum") return OptimizerKind::kSgdMomentum;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

void optimizer_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                    OptimizerState& state, const OptimizerConfig& cfg) {
  if (params.size() != grads.size()) {
    fail(ErrorCode::kShapeMismatch, "optimizer_step: parameter/gradient count mismatch");
  }
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.numel(), 0.0);
      if (cfg.kind == OptimizerKind::kAdam) state.second.emplace_back(p.numel(), 0.0);
    }
  }
  if (state.first.size() != params.size()) {
    fail(ErrorCode::kShapeMismatch, "optimizer_step: state does not match parameters");
  }
  ++state.step;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& p = params[i];
    if (grads[i].shape() != p.shape() || state.first[i].size() != p.numel()) {
      fail(ErrorCode::kShapeMismatch, "optimizer_step: shape mismatch for parameter " +
                                          std::to_string(i) + " " + to_string(p.shape()) +
                                          " vs " + to_string(grads[i].shape()));
    }
    auto value = p.to_vector();
    auto g = grads[i].to_vector();
    auto& m = state.first[i];
    if (cfg.kind == OptimizerKind::kSgdMomentum) {
      for (std::size_t j = 0; j < value.size(); ++j) {
        m[j] = cfg.momentum * m[j] + g[j];
        value[j] -= cfg.learning_rate * m[j];
      }
    } else {
      auto& v = state.second[i];
      for (std::size_t j = 0; j < value.size(); ++j) {
        m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
        v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
        const double m_hat = m[j] / bias1;
        const double v_hat = v[j] / bias2;
        value[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
    const bool marked = p.requires_grad();
    params[i] = Tensor::from_values(p.shape(), value, p.dtype());
    if (marked) params[i].set_requires_grad();
  }
}

void TrainConfig::validate() const {
  if (epochs == 0) fail(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(optimizer.learning_rate > 0)) {
    fail(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (kl_weight < 0) fail(ErrorCode::kInvalidArgument, "kl_weight must be >= 0");
  inner_attack.validate();
}

TrainConfig default_train_config(DefenseKind kind) {
  TrainConfig cfg;
  cfg.defense = kind;
  cfg.inner_attack.steps = 10;
  cfg.inner_attack.gamma = 0.07;
  if (kind == DefenseKind::kAdvTraining) {
    cfg.optimizer.kind = OptimizerKind::kSgdMomentum;
    cfg.optimizer.learning_rate = 0.01;
    cfg.optimizer.momentum = 0.9;
  } else {
    cfg.optimizer.kind = OptimizerKind::kAdam;
    cfg.optimizer.learning_rate = 1e-3;
  }
  return cfg;
}

TrainResult train_defense(StochasticModel model, const Dataset& train,
                          const TrainConfig& cfg, const Dataset* probe,
                          const TrainHooks& hooks) {
  cfg.validate();
  if (train.size() == 0) fail(ErrorCode::kInvalidArgument, "empty training set");
  if (defense_is_stochastic(cfg.defense) != model.is_stochastic()) {
    fail(ErrorCode::kModelMismatch,
         std::string("defense ") + to_string(cfg.defense) + " requires a " +
             (defense_is_stochastic(cfg.defense) ? "stochastic" : "deterministic") +
             " model");
  }
  if (train.dim() != model.spec().input_dim) {
    fail(ErrorCode::kShapeMismatch, "training data dim does not match model input");
  }

  Dataset probe_set;
  if (cfg.probe_size > 0) {
    probe_set = (probe != nullptr ? *probe : train).head(cfg.probe_size);
  }

  TrainResult result;
  OptimizerState opt_state;
  const AttackKind attack_kind = inner_attack_kind(cfg.defense);
  const bool adversarial = cfg.inner_attack.gamma > 0;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle = make_rng(cfg.seed, {stream::kShuffle, epoch});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle() % i]);

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
      Batch batch = train.batch(std::span<const std::size_t>(order).subspan(begin, count));

      if (adversarial) {
        AttackConfig attack = cfg.inner_attack;
        attack.seed = derive_seed(cfg.seed, {stream::kAttack, epoch, batch_index});
        attack.threads = cfg.threads;
        AttackResult crafted = run_attack(attack_kind, model, batch.inputs, batch.labels, attack);
        ++result.counters.attack_calls;
        if (hooks.on_adversarial_batch) {
          hooks.on_adversarial_batch(epoch, batch_index, batch.inputs, crafted.adversarial);
        }
        batch.inputs = crafted.adversarial;
      }

      model.set_requires_grad(true);
      Tensor loss;
      Trace trace;
      {
        TraceScope scope(trace);
        if (model.is_stochastic()) {
          Rng noise = make_rng(cfg.seed, {stream::kTrain, epoch, batch_index});
          loss = variational_loss(model, batch, sample_noise(model, noise), cfg.kl_weight);
        } else {
          loss = ops::mean(ops::cross_entropy_with_logits(
              model.forward(batch.inputs, NoiseVector{}), batch.labels));
        }
      }
      const double value = loss.item();
      if (!std::isfinite(value)) {
        fail(ErrorCode::kNonFinite, "non-finite training loss at epoch " +
                                        std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index));
      }
      backward(loss, trace);
      std::vector<Tensor> params = model.parameters();
      std::vector<Tensor> grads;
      for (const auto& p : params) {
        grads.push_back(p.has_grad() ? p.grad() : Tensor::zeros(p.shape(), p.dtype()));
      }
      optimizer_step(params, grads, opt_state, cfg.optimizer);
      model.set_parameters(std::move(params));
      model.set_requires_grad(false);
      ++result.counters.optimizer_steps;
      loss_sum += value * static_cast<double>(count);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.train_loss = loss_sum / static_cast<double>(train.size());
    if (cfg.probe_size > 0) {
      EnsembleEval eval{cfg.probe_m_eval, derive_seed(cfg.seed, {stream::kProbe, epoch}),
                        EnsembleMode::kProbabilities, cfg.threads};
      auto clean = ensemble_predictions(model, probe_set.inputs, eval);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < clean.size(); ++i) correct += clean[i] == probe_set.labels[i];
      metrics.clean_accuracy = static_cast<double>(correct) / static_cast<double>(clean.size());
      if (adversarial) {
        AttackConfig attack = cfg.inner_attack;
        attack.seed = derive_seed(cfg.seed, {stream::kProbe, epoch, 1});
        attack.threads = cfg.threads;
        AttackOptions options;
        options.evaluate = eval;
        auto robust = run_attack(attack_kind, model, probe_set.inputs, probe_set.labels,
                                 attack, options);
        metrics.robust_accuracy = 1.0 - robust.success_rate();
      } else {
        metrics.robust_accuracy = metrics.clean_accuracy;
      }
    }
    if (hooks.on_epoch) hooks.on_epoch(metrics);
    result.metrics.push_back(metrics);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace abnn
