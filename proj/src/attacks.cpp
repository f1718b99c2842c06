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

#include "abnn/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "abnn/ops.hpp"
#include "abnn/parallel.hpp"

namespace abnn {

const char* to_string(StepRule rule) {
  return rule == StepRule::kSign ? "sign" : "raw";
}

StepRule step_rule_from_string(const std::string& name) {
  if (name == "sign") return StepRule::kSign;
  if (name == "raw") return StepRule::kRaw;
  fail(ErrorCode::kInvalidArgument, "unknown step rule '" + name + "'");
}

const char* to_string(AttackKind kind) {
  return kind == AttackKind::kNaive ? "naive" : "apgd";
}

AttackKind attack_kind_from_string(const std::string& name) {
  if (name == "naive") return AttackKind::kNaive;
  if (name == "apgd") return AttackKind::kAveraged;
  fail(ErrorCode::kInvalidArgument, "unknown attack kind '" + name + "'");
}

void AttackConfig::validate() const {
  if (!(gamma >= 0)) fail(ErrorCode::kInvalidArgument, "attack gamma must be >= 0");
  if (m_grad == 0) fail(ErrorCode::kInvalidArgument, "attack m_grad must be >= 1");
  if (!(lo < hi)) fail(ErrorCode::kInvalidArgument, "attack data range needs lo < hi");
  if (gamma > 0 && steps > 0 && !(resolved_eta() > 0)) {
    fail(ErrorCode::kInvalidArgument, "attack eta must be > 0");
  }
}

double AttackConfig::resolved_eta() const {
  if (eta > 0) return eta;
  return 2.5 * gamma / static_cast<double>(std::max<std::size_t>(steps, 1));
}

double AttackResult::success_rate() const {
  if (success.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto s : success) hits += s;
  return static_cast<double>(hits) / static_cast<double>(success.size());
}

namespace {

template <class T>
void project_values(std::span<T> xhat, std::span<const T> x, double gamma,
                    double lo, double hi) {
  const T g = static_cast<T>(gamma);
  // Round the range inward so float32 results never leave [lo, hi].
  T low = static_cast<T>(lo), high = static_cast<T>(hi);
  if (static_cast<double>(low) < lo) low = std::nextafter(low, high);
  if (static_cast<double>(high) > hi) high = std::nextafter(high, low);
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const T lower = std::max(x[i] - g, low);
    const T upper = std::min(x[i] + g, high);
    xhat[i] = std::min(std::max(xhat[i], lower), upper);
  }
}

}  // namespace

Tensor project_linf(const Tensor& xhat, const Tensor& x, const AttackConfig& cfg) {
  if (xhat.shape() != x.shape()) {
    fail(ErrorCode::kShapeMismatch, "project_linf: incompatible shapes " +
                                        to_string(xhat.shape()) + " and " +
                                        to_string(x.shape()));
  }
  if (xhat.dtype() != x.dtype()) {
    fail(ErrorCode::kDTypeMismatch, "project_linf: mixed dtypes");
  }
  return dispatch(x.dtype(), [&]<class T>() {
    auto v = xhat.data<T>();
    std::vector<T> out(v.begin(), v.end());
    project_values<T>(out, x.data<T>(), cfg.gamma, cfg.lo, cfg.hi);
    return Tensor::from_vector<T>(x.shape(), std::move(out));
  });
}

Tensor input_gradient(const StochasticModel& model, const Tensor& x,
                      std::span<const int> labels, const NoiseVector& eps,
                      double* loss) {
  Trace trace;
  TraceScope scope(trace);
  Tensor input = x.detach();
  input.set_requires_grad();
  Tensor total = ops::sum(
      ops::cross_entropy_with_logits(model.forward(input, eps), labels));
  backward(total, trace);
  if (loss != nullptr) *loss = total.item();
  return input.grad();
}

Tensor average_gradient(const SampleGradient& sample, const Tensor& x,
                        std::size_t m, Rng& rng, double* mean_loss) {
  if (m == 0) fail(ErrorCode::kInvalidArgument, "m_grad must be >= 1");
  return dispatch(x.dtype(), [&]<class T>() {
    std::vector<T> acc;
    double loss_total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double loss = 0.0;
      Tensor g = sample(x, rng, &loss);
      loss_total += loss;
      auto gv = g.data<T>();
      if (i == 0) {
        acc.assign(gv.begin(), gv.end());
      } else {
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += gv[j];
      }
    }
    if (m > 1) {
      const T denom = static_cast<T>(m);
      for (auto& a : acc) a /= denom;
    }
    if (mean_loss != nullptr) *mean_loss = loss_total / static_cast<double>(m);
    return Tensor::from_vector<T>(x.shape(), std::move(acc));
  });
}

Tensor avg_input_grad(const StochasticModel& model, const Tensor& x,
                      std::span<const int> labels, std::size_t m_grad, Rng& rng,
                      double* mean_loss) {
  SampleGradient sample = [&](const Tensor& at, Rng& r, double* loss) {
    return input_gradient(model, at, labels, sample_noise(model, r), loss);
  };
  return average_gradient(sample, x, m_grad, rng, mean_loss);
}

namespace {

void check_inputs(const StochasticModel& model, const Tensor& x,
                  std::span<const int> labels) {
  if (x.rank() != 2 || x.shape()[1] != model.spec().input_dim) {
    fail(ErrorCode::kShapeMismatch, "attack: input shape " + to_string(x.shape()) +
                                        " does not match model input dim " +
                                        std::to_string(model.spec().input_dim));
  }
  if (labels.size() != x.shape()[0]) {
    fail(ErrorCode::kShapeMismatch, "attack: label count does not match inputs");
  }
}

template <class T>
AttackResult pgd(AttackKind kind, const StochasticModel& source, const Tensor& x,
                 std::span<const int> labels, const AttackConfig& cfg,
                 const AttackOptions& options) {
  const StochasticModel model = source.frozen();
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  const T eta = static_cast<T>(cfg.resolved_eta());
  const auto clean = x.data<T>();

  for (std::size_t i = 1; i < options.snapshot_steps.size(); ++i) {
    if (options.snapshot_steps[i] < options.snapshot_steps[i - 1]) {
      fail(ErrorCode::kInvalidArgument, "snapshot steps must be ascending");
    }
  }
  for (auto s : options.snapshot_steps) {
    if (s > cfg.steps) fail(ErrorCode::kInvalidArgument, "snapshot step beyond attack steps");
  }

  std::vector<T> adversarial(n * d);
  std::vector<double> losses(n * cfg.steps, 0.0);
  std::vector<std::vector<T>> trajectory(options.record_trajectory ? cfg.steps + 1 : 0,
                                         std::vector<T>(n * d));
  std::vector<std::vector<T>> snapshots(options.snapshot_steps.size(),
                                        std::vector<T>(n * d));

  parallel_for(n, cfg.threads, [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed, {stream::kAttack, i});
    std::span<const T> x0 = clean.subspan(i * d, d);
    std::vector<T> cur(x0.begin(), x0.end());
    std::span<const int> label = labels.subspan(i, 1);
    if (cfg.random_start) {
      std::uniform_real_distribution<double> start(-cfg.gamma, cfg.gamma);
      for (auto& v : cur) v += static_cast<T>(start(rng));
      project_values<T>(cur, x0, cfg.gamma, cfg.lo, cfg.hi);
    }
    auto capture = [&](std::size_t t) {
      if (options.record_trajectory) {
        std::copy(cur.begin(), cur.end(), trajectory[t].begin() + static_cast<std::ptrdiff_t>(i * d));
      }
      for (std::size_t s = 0; s < options.snapshot_steps.size(); ++s) {
        if (options.snapshot_steps[s] == t) {
          std::copy(cur.begin(), cur.end(), snapshots[s].begin() + static_cast<std::ptrdiff_t>(i * d));
        }
      }
    };
    capture(0);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
      Tensor at = Tensor::from_vector<T>({1, d}, cur);
      double loss = 0.0;
      Tensor g = kind == AttackKind::kNaive
                     ? input_gradient(model, at, label, sample_noise(model, rng), &loss)
                     : avg_input_grad(model, at, label, cfg.m_grad, rng, &loss);
      losses[i * cfg.steps + t] = loss;
      auto gv = g.data<T>();
      for (std::size_t j = 0; j < d; ++j) {
        T dir = gv[j];
        if (cfg.step_rule == StepRule::kSign) {
          dir = dir > T(0) ? T(1) : (dir < T(0) ? T(-1) : T(0));
        }
        cur[j] += eta * dir;
      }
      project_values<T>(cur, x0, cfg.gamma, cfg.lo, cfg.hi);
      capture(t + 1);
    }
    std::copy(cur.begin(), cur.end(), adversarial.begin() + static_cast<std::ptrdiff_t>(i * d));
  });

  AttackResult result;
  result.adversarial = Tensor::from_vector<T>(x.shape(), std::move(adversarial));
  result.loss_trace.assign(cfg.steps, 0.0);
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) result.loss_trace[t] += losses[i * cfg.steps + t];
    result.loss_trace[t] /= static_cast<double>(n);
  }
  for (auto& step : trajectory) {
    result.trajectory.push_back(Tensor::from_vector<T>(x.shape(), std::move(step)));
  }
  for (auto& snap : snapshots) {
    result.snapshots.push_back(Tensor::from_vector<T>(x.shape(), std::move(snap)));
  }
  if (options.evaluate) {
    result.success = evaluate_attack_success(model, result.adversarial, labels, *options.evaluate);
  }
  return result;
}

}  // namespace

AttackResult run_attack(AttackKind kind, const StochasticModel& model, const Tensor& x,
                        std::span<const int> labels, const AttackConfig& cfg,
                        const AttackOptions& options) {
  cfg.validate();
  check_inputs(model, x, labels);
  if (x.dtype() != model.spec().dtype) {
    fail(ErrorCode::kDTypeMismatch, "attack: input dtype does not match model dtype");
  }
  return dispatch(x.dtype(), [&]<class T>() {
    return pgd<T>(kind, model, x, labels, cfg, options);
  });
}

AttackResult naive_pgd(const StochasticModel& model, const Tensor& x,
                       std::span<const int> labels, const AttackConfig& cfg,
                       const AttackOptions& options) {
  return run_attack(AttackKind::kNaive, model, x, labels, cfg, options);
}

AttackResult averaged_pgd(const StochasticModel& model, const Tensor& x,
                          std::span<const int> labels, const AttackConfig& cfg,
                          const AttackOptions& options) {
  return run_attack(AttackKind::kAveraged, model, x, labels, cfg, options);
}

std::vector<int> ensemble_predictions(const StochasticModel& model, const Tensor& x,
                                      const EnsembleEval& eval) {
  if (eval.m_eval == 0) fail(ErrorCode::kInvalidArgument, "m_eval must be >= 1");
  if (!model.is_stochastic()) {
    return argmax_rows(model.forward(x.detach(), NoiseVector{}));
  }
  const StochasticModel frozen = model.frozen();
  const std::size_t n = x.shape()[0], d = x.shape()[1];
  std::vector<int> out(n);
  parallel_for(n, eval.threads, [&](std::size_t i) {
    Rng rng = make_rng(eval.seed, {stream::kEval, i});
    Tensor row = dispatch(x.dtype(), [&]<class T>() {
      auto all = x.data<T>();
      return Tensor::from_vector<T>(
          {1, d}, std::vector<T>(all.begin() + static_cast<std::ptrdiff_t>(i * d),
                                 all.begin() + static_cast<std::ptrdiff_t>((i + 1) * d)));
    });
    out[i] = argmax_rows(predict_ensemble(frozen, row, eval.m_eval, rng, eval.mode))[0];
  });
  return out;
}

std::vector<std::uint8_t> evaluate_attack_success(const StochasticModel& model,
                                                  const Tensor& adversarial,
                                                  std::span<const int> labels,
                                                  const EnsembleEval& eval) {
  auto predicted = ensemble_predictions(model, adversarial, eval);
  if (predicted.size() != labels.size()) {
    fail(ErrorCode::kShapeMismatch, "evaluate_attack_success: label count mismatch");
  }
  std::vector<std::uint8_t> success(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) success[i] = predicted[i] != labels[i];
  return success;
}

}  // namespace abnn
