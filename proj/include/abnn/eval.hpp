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

// Robust-accuracy measurement: clean and attacked ensemble accuracy,
// step-count sweeps and gradient-variance probes.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "abnn/attacks.hpp"
#include "abnn/dataset.hpp"
#include "abnn/model.hpp"

namespace abnn {

// Fraction of examples whose ensemble argmax equals the label.
double clean_accuracy(const StochasticModel& model, const Dataset& data,
                      const EnsembleEval& eval);

struct RobustEvaluation {
  double accuracy = 0.0;
  AttackResult attack;
};

// The attack and the ensemble evaluation draw from independent streams
// (cfg.seed and eval.seed).
RobustEvaluation robust_accuracy(const StochasticModel& model, const Dataset& data,
                                 AttackKind kind, const AttackConfig& cfg,
                                 const EnsembleEval& eval);

struct SweepPoint {
  std::size_t steps = 0;
  double success_rate = 0.0;
};

// Success rate after each step count of an ascending grid. The step size is
// cfg.resolved_eta() for every grid point and each example keeps its rng
// stream, so every grid point equals a standalone attack of that length.
std::vector<SweepPoint> steps_sweep(const StochasticModel& model, const Dataset& data,
                                    AttackKind kind, const AttackConfig& cfg,
                                    std::span<const std::size_t> step_grid,
                                    const EnsembleEval& eval);

struct VarianceProbe {
  std::size_t m_grad = 0;
  double mean_variance = 0.0;            // averaged over coordinates
  std::vector<double> per_coordinate;    // unbiased sample variance
};

// Empirical variance of avg_input_grad at fixed x over `repetitions` calls
// for each m_grad in m_grid.
std::vector<VarianceProbe> grad_variance_probe(const StochasticModel& model,
                                               const Tensor& x, std::span<const int> labels,
                                               std::span<const std::size_t> m_grid,
                                               std::size_t repetitions, std::uint64_t seed);

double binomial_standard_error(double p, std::size_t n);

}  // namespace abnn
