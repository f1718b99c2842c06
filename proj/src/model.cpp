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

#include "abnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "abnn/ops.hpp"

namespace abnn {

void ModelSpec::validate() const {
  if (input_dim == 0) fail(ErrorCode::kInvalidArgument, "input_dim must be positive");
  if (classes < 2) fail(ErrorCode::kInvalidArgument, "need at least 2 classes");
  for (auto h : hidden) {
    if (h == 0) fail(ErrorCode::kInvalidArgument, "hidden widths must be positive");
  }
  if (!(prior_sigma > 0)) {
    fail(ErrorCode::kInvalidArgument, "prior_sigma must be positive");
  }
  if (stochastic && !(init_sigma_ratio > 0)) {
    fail(ErrorCode::kInvalidArgument, "init_sigma_ratio must be positive");
  }
}

const char* to_string(EnsembleMode mode) {
  return mode == EnsembleMode::kProbabilities ? "prob" : "logit";
}

EnsembleMode ensemble_mode_from_string(const std::string& name) {
  if (name == "prob") return EnsembleMode::kProbabilities;
  if (name == "logit") return EnsembleMode::kLogits;
  fail(ErrorCode::kInvalidArgument, "unknown ensemble mode '" + name + "'");
}

const Tensor* NoiseVector::find(std::size_t layer,
                                const std::string& name) const {
  for (const auto& e : entries) {
    if (e.layer == layer && e.name == name) return &e.value;
  }
  return nullptr;
}

bool NoiseVector::bit_equal(const NoiseVector& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& a = entries[i];
    const auto& b = other.entries[i];
    if (a.layer != b.layer || a.name != b.name || !a.value.bit_equal(b.value)) {
      return false;
    }
  }
  return true;
}

namespace {

std::vector<std::size_t> layer_widths(const ModelSpec& spec) {
  std::vector<std::size_t> widths{spec.input_dim};
  widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
  widths.push_back(spec.classes);
  return widths;
}

void expect_shape(const Tensor& t, const Shape& shape, DType dtype,
                  const std::string& what) {
  if (!t.defined()) fail(ErrorCode::kModelMismatch, what + " is missing");
  if (t.shape() != shape) {
    fail(ErrorCode::kShapeMismatch, what + ": expected " + to_string(shape) +
                                        ", got " + to_string(t.shape()));
  }
  if (t.dtype() != dtype) {
    fail(ErrorCode::kDTypeMismatch, what + ": expected " +
                                        std::string(to_string(dtype)) +
                                        ", got " + to_string(t.dtype()));
  }
}

Tensor uniform_tensor(const Shape& shape, double bound, DType dtype, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor::from_values(shape, v, dtype);
}

Tensor normal_tensor(const Shape& shape, DType dtype, Rng& rng) {
  return dispatch(dtype, [&]<class T>() {
    std::vector<T> v(numel(shape));
    fill_normal<T>(v, rng);
    return Tensor::from_vector<T>(shape, std::move(v));
  });
}

}  // namespace

StochasticModel::StochasticModel(ModelSpec spec, std::vector<Layer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)) {
  spec_.validate();
  auto widths = layer_widths(spec_);
  if (layers_.size() != widths.size() - 1) {
    fail(ErrorCode::kModelMismatch,
         "expected " + std::to_string(widths.size() - 1) + " layers, got " +
             std::to_string(layers_.size()));
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    const Shape w{widths[l], widths[l + 1]}, b{widths[l + 1]};
    expect_shape(layer.weight_mu, w, spec_.dtype, prefix + "weight_mu");
    expect_shape(layer.bias_mu, b, spec_.dtype, prefix + "bias_mu");
    if (layer.weight_rho.defined() != layer.bias_rho.defined()) {
      fail(ErrorCode::kModelMismatch, prefix + "rho tensors must come in pairs");
    }
    if (layer.stochastic()) {
      expect_shape(layer.weight_rho, w, spec_.dtype, prefix + "weight_rho");
      expect_shape(layer.bias_rho, b, spec_.dtype, prefix + "bias_rho");
      if (!(layer.prior_sigma > 0)) {
        fail(ErrorCode::kInvalidArgument, prefix + "prior_sigma must be positive");
      }
    }
  }
}

StochasticModel StochasticModel::initialize(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  auto widths = layer_widths(spec);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    Layer layer;
    layer.prior_sigma = spec.prior_sigma;
    layer.weight_mu = uniform_tensor({widths[l], widths[l + 1]}, bound, spec.dtype, rng);
    layer.bias_mu = uniform_tensor({widths[l + 1]}, bound, spec.dtype, rng);
    if (spec.stochastic) {
      const double sigma0 = spec.init_sigma_ratio * bound;
      const double rho0 = std::log(std::expm1(sigma0));
      layer.weight_rho = Tensor::full({widths[l], widths[l + 1]}, rho0, spec.dtype);
      layer.bias_rho = Tensor::full({widths[l + 1]}, rho0, spec.dtype);
    }
    layers.push_back(std::move(layer));
  }
  return StochasticModel(spec, std::move(layers));
}

bool StochasticModel::is_stochastic() const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [](const Layer& l) { return l.stochastic(); });
}

Tensor StochasticModel::forward(const Tensor& x, const NoiseVector& eps) const {
  // Every stochastic parameter needs exactly one noise entry.
  std::vector<std::string> missing, extra;
  std::size_t matched = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!layers_[l].stochastic()) continue;
    for (const char* name : {"weight", "bias"}) {
      const Tensor* e = eps.find(l, name);
      if (e == nullptr) {
        missing.push_back("layer" + std::to_string(l) + "." + name);
        continue;
      }
      ++matched;
      const Tensor& target =
          std::string(name) == "weight" ? layers_[l].weight_mu : layers_[l].bias_mu;
      if (e->shape() != target.shape() || e->dtype() != target.dtype()) {
        fail(ErrorCode::kNoiseMismatch,
             "noise for layer" + std::to_string(l) + "." + name + " has shape " +
                 to_string(e->shape()) + ", expected " + to_string(target.shape()));
      }
    }
  }
  if (matched != eps.entries.size()) {
    for (const auto& e : eps.entries) {
      bool known = e.layer < layers_.size() && layers_[e.layer].stochastic() &&
                   (e.name == "weight" || e.name == "bias");
      if (!known) extra.push_back("layer" + std::to_string(e.layer) + "." + e.name);
    }
  }
  if (!missing.empty() || !extra.empty() || matched != eps.entries.size()) {
    std::ostringstream os;
    os << "noise vector does not match model;";
    if (!missing.empty()) {
      os << " missing:";
      for (const auto& m : missing) os << ' ' << m;
    }
    if (!extra.empty()) {
      os << " extra:";
      for (const auto& m : extra) os << ' ' << m;
    }
    if (missing.empty() && extra.empty()) os << " duplicate entries";
    fail(ErrorCode::kNoiseMismatch, os.str());
  }
  if (x.rank() != 2 || x.shape()[1] != spec_.input_dim) {
    fail(ErrorCode::kShapeMismatch,
         "forward: input shape " + to_string(x.shape()) + " does not match [n, " +
             std::to_string(spec_.input_dim) + "]");
  }

  Tensor h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    Tensor w = layer.weight_mu, b = layer.bias_mu;
    if (layer.stochastic()) {
      Tensor sw, sb;
      if (!sigma_cache_.empty()) {
        sw = sigma_cache_[l].weight;
        sb = sigma_cache_[l].bias;
      } else {
        sw = ops::softplus(layer.weight_rho);
        sb = ops::softplus(layer.bias_rho);
      }
      w = ops::add(w, ops::mul(sw, *eps.find(l, "weight")));
      b = ops::add(b, ops::mul(sb, *eps.find(l, "bias")));
    }
    h = ops::add_bias(ops::matmul(h, w), b);
    if (l + 1 < layers_.size()) h = ops::relu(h);
  }
  return h;
}

std::vector<NamedTensor> StochasticModel::named_parameters() const {
  std::vector<NamedTensor> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const auto& layer = layers_[l];
    out.push_back({p + "weight_mu", layer.weight_mu});
    out.push_back({p + "bias_mu", layer.bias_mu});
    if (layer.stochastic()) {
      out.push_back({p + "weight_rho", layer.weight_rho});
      out.push_back({p + "bias_rho", layer.bias_rho});
    }
  }
  return out;
}

std::vector<Tensor> StochasticModel::parameters() const {
  std::vector<Tensor> out;
  for (auto& nt : named_parameters()) out.push_back(nt.value);
  return out;
}

void StochasticModel::set_parameters(std::vector<Tensor> params) {
  auto current = named_parameters();
  if (params.size() != current.size()) {
    fail(ErrorCode::kModelMismatch,
         "expected " + std::to_string(current.size()) + " parameters, got " +
             std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    expect_shape(params[i], current[i].value.shape(), current[i].value.dtype(),
                 current[i].name);
  }
  std::size_t i = 0;
  for (auto& layer : layers_) {
    layer.weight_mu = std::move(params[i++]);
    layer.bias_mu = std::move(params[i++]);
    if (layer.stochastic()) {
      layer.weight_rho = std::move(params[i++]);
      layer.bias_rho = std::move(params[i++]);
    }
  }
  sigma_cache_.clear();
}

void StochasticModel::set_requires_grad(bool value) {
  for (auto& t : parameters()) {
    auto copy = t;
    copy.set_requires_grad(value);
  }
}

StochasticModel StochasticModel::frozen() const {
  StochasticModel out;
  out.spec_ = spec_;
  for (const auto& layer : layers_) {
    Layer copy;
    copy.prior_sigma = layer.prior_sigma;
    copy.weight_mu = layer.weight_mu.detach();
    copy.bias_mu = layer.bias_mu.detach();
    SigmaCache cache;
    if (layer.stochastic()) {
      copy.weight_rho = layer.weight_rho.detach();
      copy.bias_rho = layer.bias_rho.detach();
      cache.weight = ops::softplus(copy.weight_rho);
      cache.bias = ops::softplus(copy.bias_rho);
    }
    out.layers_.push_back(std::move(copy));
    out.sigma_cache_.push_back(std::move(cache));
  }
  return out;
}

double StochasticModel::max_sigma() const {
  double best = 0.0;
  for (const auto& layer : layers_) {
    if (!layer.stochastic()) continue;
    for (const Tensor* rho : {&layer.weight_rho, &layer.bias_rho}) {
      for (double r : rho->to_vector()) best = std::max(best, ops::softplus_value(r));
    }
  }
  return best;
}

NoiseVector sample_noise(const StochasticModel& model, Rng& rng) {
  NoiseVector eps;
  const auto layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!layers[l].stochastic()) continue;
    eps.entries.push_back({l, "weight",
                           normal_tensor(layers[l].weight_mu.shape(),
                                         layers[l].weight_mu.dtype(), rng)});
    eps.entries.push_back({l, "bias",
                           normal_tensor(layers[l].bias_mu.shape(),
                                         layers[l].bias_mu.dtype(), rng)});
  }
  return eps;
}

NoiseVector zero_noise(const StochasticModel& model) {
  NoiseVector eps;
  const auto layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (!layers[l].stochastic()) continue;
    eps.entries.push_back(
        {l, "weight", Tensor::zeros(layers[l].weight_mu.shape(), layers[l].weight_mu.dtype())});
    eps.entries.push_back(
        {l, "bias", Tensor::zeros(layers[l].bias_mu.shape(), layers[l].bias_mu.dtype())});
  }
  return eps;
}

Tensor predict_ensemble(const StochasticModel& model, const Tensor& x,
                        std::size_t m_eval, Rng& rng, EnsembleMode mode) {
  if (m_eval == 0) fail(ErrorCode::kInvalidArgument, "m_eval must be at least 1");
  const Tensor input = x.detach();
  if (!model.is_stochastic()) {
    return ops::softmax(model.forward(input, NoiseVector{}));
  }
  const std::size_t rows = input.shape()[0], k = model.classes();
  std::vector<double> acc(rows * k, 0.0);
  for (std::size_t s = 0; s < m_eval; ++s) {
    Tensor logits = model.forward(input, sample_noise(model, rng));
    Tensor contrib = mode == EnsembleMode::kProbabilities ? ops::softmax(logits) : logits;
    auto v = contrib.to_vector();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  for (auto& a : acc) a /= static_cast<double>(m_eval);
  if (mode == EnsembleMode::kLogits) {
    return ops::softmax(Tensor::from_values({rows, k}, acc, model.spec().dtype));
  }
  return Tensor::from_values({rows, k}, acc, model.spec().dtype);
}

std::vector<int> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) {
    fail(ErrorCode::kShapeMismatch, "argmax_rows needs a matrix, got " +
                                        to_string(scores.shape()));
  }
  const std::size_t rows = scores.shape()[0], k = scores.shape()[1];
  auto v = scores.to_vector();
  std::vector<int> out(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    auto begin = v.begin() + static_cast<std::ptrdiff_t>(i * k);
    out[i] = static_cast<int>(std::max_element(begin, begin + static_cast<std::ptrdiff_t>(k)) - begin);
  }
  return out;
}

double kl_gaussian(double mu, double sigma, double prior_sigma) {
  if (!(prior_sigma > 0)) fail(ErrorCode::kInvalidArgument, "prior_sigma must be positive");
  return std::log(prior_sigma / sigma) +
         (sigma * sigma + mu * mu) / (2.0 * prior_sigma * prior_sigma) - 0.5;
}

namespace {

Tensor kl_terms(const Tensor& mu, const Tensor& rho, double s0) {
  Tensor sigma = ops::softplus(rho);
  Tensor quad = ops::scale(ops::add(ops::mul(sigma, sigma), ops::mul(mu, mu)),
                           1.0 / (2.0 * s0 * s0));
  Tensor terms = ops::add_scalar(ops::sub(quad, ops::log(sigma)), std::log(s0) - 0.5);
  return ops::sum(terms);
}

}  // namespace

Tensor kl_to_prior(const Layer& layer) {
  if (!(layer.prior_sigma > 0)) {
    fail(ErrorCode::kInvalidArgument, "prior_sigma must be positive");
  }
  if (!layer.stochastic()) return Tensor::scalar(0.0, layer.weight_mu.dtype());
  return ops::add(kl_terms(layer.weight_mu, layer.weight_rho, layer.prior_sigma),
                  kl_terms(layer.bias_mu, layer.bias_rho, layer.prior_sigma));
}

Tensor variational_loss(const StochasticModel& model, const Batch& batch,
                        const NoiseVector& eps, double kl_weight) {
  if (!batch.inputs.defined() || batch.labels.empty()) {
    fail(ErrorCode::kInvalidArgument, "variational_loss: empty batch");
  }
  if (kl_weight < 0) fail(ErrorCode::kInvalidArgument, "kl_weight must be >= 0");
  Tensor loss = ops::mean(ops::cross_entropy_with_logits(
      model.forward(batch.inputs, eps), batch.labels));
  if (kl_weight == 0 || !model.is_stochastic()) return loss;
  if (batch.dataset_size == 0) {
    fail(ErrorCode::kInvalidArgument, "variational_loss: dataset_size must be positive");
  }
  Tensor kl;
  for (const auto& layer : model.layers()) {
    if (!layer.stochastic()) continue;
    Tensor term = kl_to_prior(layer);
    kl = kl.defined() ? ops::add(kl, term) : term;
  }
  return ops::add(loss, ops::scale(kl, kl_weight / static_cast<double>(batch.dataset_size)));
}

}  // namespace abnn
