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

#include "abnn/eval.hpp"

#include <cmath>
#include <set>

namespace abnn {

double clean_accuracy(const StochasticModel& model, const Dataset& data,
                      const EnsembleEval& eval) {
  if (data.size() == 0) fail(ErrorCode::kInvalidArgument, "clean_accuracy: empty dataset");
  auto predicted = ensemble_predictions(model, data.inputs, eval);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

RobustEvaluation robust_accuracy(const StochasticModel& model, const Dataset& data,
                                 AttackKind kind, const AttackConfig& cfg,
                                 const EnsembleEval& eval) {
  if (data.size() == 0) fail(ErrorCode::kInvalidArgument, "robust_accuracy: empty dataset");
  AttackOptions options;
  options.evaluate = eval;
  RobustEvaluation out;
  out.attack = run_attack(kind, model, data.inputs, data.labels, cfg, options);
  out.accuracy = 1.0 - out.attack.success_rate();
  return out;
}

std::vector<SweepPoint> steps_sweep(const StochasticModel& model, const Dataset& data,
                                    AttackKind kind, const AttackConfig& cfg,
                                    std::span<const std::size_t> step_grid,
                                    const EnsembleEval& eval) {
  if (step_grid.empty()) fail(ErrorCode::kInvalidArgument, "steps_sweep: empty grid");
  for (std::size_t i = 1; i < step_grid.size(); ++i) {
    if (step_grid[i] <= step_grid[i - 1]) {
      fail(ErrorCode::kInvalidArgument, "steps_sweep: grid must be strictly ascending");
    }
  }
  AttackConfig longest = cfg;
  longest.eta = cfg.resolved_eta();
  longest.steps = step_grid.back();
  AttackOptions options;
  options.snapshot_steps.assign(step_grid.begin(), step_grid.end());
  AttackResult result = run_attack(kind, model, data.inputs, data.labels, longest, options);

  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < step_grid.size(); ++i) {
    auto success = evaluate_attack_success(model, result.snapshots[i], data.labels, eval);
    std::size_t hits = 0;
    for (auto s : success) hits += s;
    out.push_back({step_grid[i], static_cast<double>(hits) / static_cast<double>(success.size())});
  }
  return out;
}

std::vector<VarianceProbe> grad_variance_probe(const StochasticModel& model,
                                               const Tensor& x, std::span<const int> labels,
                                               std::span<const std::size_t> m_grid,
                                               std::size_t repetitions, std::uint64_t seed) {
  if (repetitions < 2) fail(ErrorCode::kInvalidArgument, "grad_variance_probe: need >= 2 repetitions");
  std::set<std::size_t> distinct(m_grid.begin(), m_grid.end());
  if (distinct.size() != m_grid.size()) {
    fail(ErrorCode::kInvalidArgument, "grad_variance_probe: m_grid values must be distinct");
  }
  const StochasticModel frozen = model.frozen();
  std::vector<VarianceProbe> out;
  for (std::size_t m : m_grid) {
    Rng rng = make_rng(seed, {stream::kProbe, m});
    const std::size_t dims = x.numel();
    std::vector<double> sum(dims, 0.0);
    std::vector<std::vector<double>> samples;
    samples.reserve(repetitions);
    for (std::size_t r = 0; r < repetitions; ++r) {
      samples.push_back(avg_input_grad(frozen, x, labels, m, rng).to_vector());
      for (std::size_t j = 0; j < dims; ++j) sum[j] += samples.back()[j];
    }
    VarianceProbe probe;
    probe.m_grad = m;
    probe.per_coordinate.assign(dims, 0.0);
    for (std::size_t j = 0; j < dims; ++j) {
      const double mu = sum[j] / static_cast<double>(repetitions);
      double acc = 0.0;
      for (const auto& s : samples) acc += (s[j] - mu) * (s[j] - mu);
      probe.per_coordinate[j] = acc / static_cast<double>(repetitions - 1);
      probe.mean_variance += probe.per_coordinate[j];
    }
    probe.mean_variance /= static_cast<double>(dims);
    out.push_back(std::move(probe));
  }
  return out;
}

double binomial_standard_error(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace abnn
