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

// Gaussian variational feed-forward classifiers.
//
// A stochastic layer holds posterior means (mu) and pre-softplus spreads
// (rho); a forward pass uses w = mu + softplus(rho) * eps, where eps is an
// explicit NoiseVector argument. All randomness enters through eps, so
// forward() itself is a pure function.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abnn/rng.hpp"
#include "abnn/tensor.hpp"

namespace abnn {

struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 0;
  bool stochastic = false;
  double prior_sigma = 1.0;
  // Initial sigma as a fraction of the fan-in uniform init bound.
  double init_sigma_ratio = 0.05;
  DType dtype = DType::kFloat32;

  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct Layer {
  Tensor weight_mu;   // [in, out]
  Tensor bias_mu;     // [out]
  Tensor weight_rho;  // undefined for a deterministic affine layer
  Tensor bias_rho;
  double prior_sigma = 1.0;

  bool stochastic() const { return weight_rho.defined(); }
};

struct NoiseEntry {
  std::size_t layer = 0;
  std::string name;  // "weight" or "bias"
  Tensor value;
};

struct NoiseVector {
  std::vector<NoiseEntry> entries;

  bool empty() const { return entries.empty(); }
  const Tensor* find(std::size_t layer, const std::string& name) const;
  bool bit_equal(const NoiseVector& other) const;
};

enum class EnsembleMode { kProbabilities, kLogits };

const char* to_string(EnsembleMode mode);
EnsembleMode ensemble_mode_from_string(const std::string& name);

struct NamedTensor {
  std::string name;
  Tensor value;
};

class StochasticModel {
 public:
  StochasticModel() = default;
  // Validates layer shapes against spec.
  StochasticModel(ModelSpec spec, std::vector<Layer> layers);

  // Fan-in scaled uniform mu; rho set so softplus(rho) equals
  // init_sigma_ratio times the init bound.
  static StochasticModel initialize(const ModelSpec& spec, Rng& rng);

  const ModelSpec& spec() const { return spec_; }
  std::span<const Layer> layers() const { return layers_; }
  std::size_t classes() const { return spec_.classes; }
  bool is_stochastic() const;

  // logits [batch, classes].
  Tensor forward(const Tensor& x, const NoiseVector& eps) const;

  // Parameters in canonical order: per layer weight_mu, bias_mu and, when
  // stochastic, weight_rho, bias_rho.
  std::vector<NamedTensor> named_parameters() const;
  std::vector<Tensor> parameters() const;
  // Replaces parameters in canonical order.
  void set_parameters(std::vector<Tensor> params);
  void set_requires_grad(bool value);

  // Unmarked copy sharing parameter storage, with softplus(rho) computed
  // once. Used for attacks and inference.
  StochasticModel frozen() const;

  double max_sigma() const;

 private:
  struct SigmaCache {
    Tensor weight;
    Tensor bias;
  };

  ModelSpec spec_;
  std::vector<Layer> layers_;
  std::vector<SigmaCache> sigma_cache_;
};

NoiseVector sample_noise(const StochasticModel& model, Rng& rng);
// All-zero noise for every stochastic parameter.
NoiseVector zero_noise(const StochasticModel& model);

// Mean of softmax(forward(x, eps_i)) over m_eval draws (or softmax of the
// mean logits in kLogits mode).
Tensor predict_ensemble(const StochasticModel& model, const Tensor& x,
                        std::size_t m_eval, Rng& rng,
                        EnsembleMode mode = EnsembleMode::kProbabilities);

std::vector<int> argmax_rows(const Tensor& scores);

// KL(N(mu, sigma^2) || N(0, prior_sigma^2)) for a single weight.
double kl_gaussian(double mu, double sigma, double prior_sigma);

// Sum of per-weight KL to the prior; differentiable w.r.t. mu and rho.
// Zero for deterministic layers.
Tensor kl_to_prior(const Layer& layer);

struct Batch {
  Tensor inputs;  // [n, d]
  std::vector<int> labels;
  std::size_t dataset_size = 0;
};

// Mean cross-entropy + kl_weight * sum(KL) / dataset_size.
Tensor variational_loss(const StochasticModel& model, const Batch& batch,
                        const NoiseVector& eps, double kl_weight);

}  // namespace abnn
