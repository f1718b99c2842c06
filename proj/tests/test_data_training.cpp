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
#include <fstream>
#include <limits>
#include <numeric>

#include "abnn/dataset.hpp"
#include "abnn/error.hpp"
#include "abnn/eval.hpp"
#include "abnn/training.hpp"
#include "test_support.hpp"

namespace abnn {
namespace {

using namespace abnn::testing;

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

TEST(Idx, ParsesHandWrittenHeader) {
  TempDir dir;
  std::vector<unsigned char> images{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 3};
  for (int i = 0; i < 18; ++i) images.push_back(i == 0 ? 255 : (i == 1 ? 0 : 51));
  write_bytes(dir / "img", images);
  write_bytes(dir / "lab", {0, 0, 8, 1, 0, 0, 0, 2, 7, 1});
  Dataset d = load_idx(dir / "img", dir / "lab", DType::kFloat64);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 9u);
  EXPECT_EQ(d.inputs.at(0), 1.0);
  EXPECT_EQ(d.inputs.at(1), 0.0);
  EXPECT_DOUBLE_EQ(d.inputs.at(2), 0.2);
  EXPECT_EQ(d.labels, (std::vector<int>{7, 1}));
  EXPECT_EQ(d.classes, 8u);
}

TEST(Idx, StructuredErrors) {
  TempDir dir;
  const std::vector<unsigned char> header{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 2};
  auto images = header;
  images.insert(images.end(), {1, 2, 3, 4});
  write_bytes(dir / "img", images);
  write_bytes(dir / "lab2", {0, 0, 8, 1, 0, 0, 0, 2, 0, 1});
  write_bytes(dir / "lab3", {0, 0, 8, 1, 0, 0, 0, 3, 0, 1, 1});
  auto bad_magic = images;
  bad_magic[3] = 4;
  write_bytes(dir / "bad", bad_magic);
  auto short_images = images;
  short_images.pop_back();
  write_bytes(dir / "short", short_images);
  write_bytes(dir / "short_labels", {0, 0, 8, 1, 0, 0, 0, 2, 0});

  EXPECT_NO_THROW(load_idx(dir / "img", dir / "lab2"));
  EXPECT_EQ(code_of([&] { load_idx(dir / "img", dir / "lab3"); }), ErrorCode::kCountMismatch);
  EXPECT_EQ(code_of([&] { load_idx(dir / "bad", dir / "lab2"); }), ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([&] { load_idx(dir / "img", dir / "img"); }), ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([&] { load_idx(dir / "short", dir / "lab2"); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { load_idx(dir / "img", dir / "short_labels"); }), ErrorCode::kTruncated);
  EXPECT_EQ(code_of([&] { load_idx(dir / "missing", dir / "lab2"); }), ErrorCode::kIo);
}

TEST(Idx, WriterIsBitExact) {
  TempDir dir;
  std::vector<std::uint8_t> pixels(3 * 2 * 4);
  std::iota(pixels.begin(), pixels.end(), 200);
  write_idx_images(dir / "img", 3, 2, 4, pixels);
  write_idx_labels(dir / "lab", std::vector<std::uint8_t>{2, 0, 1});
  auto bytes = read_bytes(dir / "img");
  std::vector<unsigned char> expected{0, 0, 8, 3, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0, 4};
  expected.insert(expected.end(), pixels.begin(), pixels.end());
  EXPECT_EQ(bytes, expected);
  Dataset d = load_idx(dir / "img", dir / "lab", DType::kFloat64);
  for (std::size_t i = 0; i < pixels.size(); ++i) EXPECT_EQ(d.inputs.at(i), pixels[i] / 255.0);
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec spec;
  Dataset a = gen_synthetic(spec, 5), b = gen_synthetic(spec, 5), c = gen_synthetic(spec, 6);
  EXPECT_TRUE(a.inputs.bit_equal(b.inputs));
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.inputs.bit_equal(c.inputs));
}

TEST(Synthetic, VanishingSpreadCollapsesToMeans) {
  SyntheticSpec spec;
  spec.classes = 3;
  spec.sigma = 1e-12;
  Dataset d = gen_synthetic(spec, 2, DType::kFloat64);
  const auto means = synthetic_means(spec, 2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      EXPECT_NEAR(d.inputs.at(i * spec.dim + j), means[d.labels[i] * spec.dim + j], 1e-10);
    }
  }
}

TEST(Synthetic, RejectsDegenerateSpecs) {
  SyntheticSpec spec;
  spec.separation = 0;
  EXPECT_THROW(gen_synthetic(spec, 1), Error);
  spec = SyntheticSpec{};
  spec.sigma = -1;
  EXPECT_THROW(gen_synthetic(spec, 1), Error);
}

TEST(Synthetic, ValuesInUnitRangeAndBalanced) {
  SyntheticSpec spec;
  spec.classes = 4;
  spec.sigma = 0.4;
  Dataset d = gen_synthetic(spec, 3);
  for (double v : d.inputs.to_vector()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  std::vector<int> counts(4, 0);
  for (int y : d.labels) ++counts[y];
  for (int c : counts) EXPECT_EQ(c, 100);
}

TEST(Split, PartitionIsDeterministic) {
  Dataset d = gen_synthetic(SyntheticSpec{}, 1);
  auto [train, test] = split_dataset(d, 0.25, 9);
  auto [train2, test2] = split_dataset(d, 0.25, 9);
  EXPECT_EQ(train.size() + test.size(), d.size());
  EXPECT_EQ(test.size(), 50u);
  EXPECT_TRUE(train.inputs.bit_equal(train2.inputs));
  EXPECT_EQ(test.labels, test2.labels);
}

TEST(Optimizer, PlainSgdStep) {
  std::vector<Tensor> params{Tensor::from_values({2}, {1.0, -1.0})};
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgdMomentum;
  cfg.momentum = 0.0;
  cfg.learning_rate = 0.1;
  OptimizerState state;
  optimizer_step(params, {Tensor::from_values({2}, {0.5, 2.0})}, state, cfg);
  EXPECT_NEAR(params[0].at(0), 0.95, 1e-15);
  EXPECT_NEAR(params[0].at(1), -1.2, 1e-15);
}

TEST(Optimizer, ZeroGradientLeavesParameters) {
  for (auto kind : {OptimizerKind::kSgdMomentum, OptimizerKind::kAdam}) {
    std::vector<Tensor> params{Tensor::from_values({3}, {0.3, -0.2, 5.0})};
    const auto before = params[0].to_vector();
    OptimizerConfig cfg;
    cfg.kind = kind;
    OptimizerState state;
    for (int i = 0; i < 3; ++i) optimizer_step(params, {Tensor::zeros({3}, DType::kFloat64)}, state, cfg);
    EXPECT_EQ(params[0].to_vector(), before);
  }
}

TEST(Optimizer, AdamMatchesHandComputation) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kAdam;
  cfg.learning_rate = 0.01;
  std::vector<Tensor> params{Tensor::from_values({2}, {1.0, -2.0})};
  OptimizerState state;
  const std::vector<std::vector<double>> grads{{0.5, -0.1}, {-0.2, 0.3}};
  std::vector<double> p{1.0, -2.0}, m{0, 0}, v{0, 0};
  for (std::size_t t = 1; t <= 2; ++t) {
    optimizer_step(params, {Tensor::from_values({2}, grads[t - 1], DType::kFloat64)}, state, cfg);
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      p[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  // First step moves each parameter by lr * sign(g).
  EXPECT_NEAR(params[0].at(0), p[0], 1e-12);
  EXPECT_NEAR(params[0].at(1), p[1], 1e-12);
  EXPECT_NEAR(p[0], 1.0 - 0.01 - 0.01 * (0.9 * 0.05 / 0.19 + 0.1 * -0.2 / 0.19) /
                         (std::sqrt((0.999 * 0.001 * 0.25 + 0.001 * 0.04) / (1 - 0.999 * 0.999)) + 1e-8),
              1e-9);
}

TEST(Optimizer, MomentumAccumulates) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgdMomentum;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;
  std::vector<Tensor> params{Tensor::from_values({1}, {0.0})};
  OptimizerState state;
  optimizer_step(params, {Tensor::from_values({1}, {1.0})}, state, cfg);
  optimizer_step(params, {Tensor::from_values({1}, {1.0})}, state, cfg);
  EXPECT_NEAR(params[0].item(), -0.1 - 0.19, 1e-15);
  EXPECT_THROW(optimizer_step(params, {}, state, cfg), Error);
}

Dataset separable(std::size_t per_class, DType dtype = DType::kFloat32) {
  SyntheticSpec spec;
  spec.per_class = per_class;
  return gen_synthetic(spec, 4, dtype);
}

TEST(Training, CleanTrainingSeparatesLinearData) {
  Dataset data = separable(100);
  Rng init(1);
  auto model = StochasticModel::initialize(small_spec(20, {}, 2, false, DType::kFloat32), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvTraining);
  cfg.inner_attack.gamma = 0;
  cfg.probe_size = 0;
  cfg.seed = 3;
  auto result = train_defense(model, data, cfg);
  EXPECT_EQ(result.counters.attack_calls, 0u);
  EnsembleEval eval{1, 0, EnsembleMode::kProbabilities, 1};
  EXPECT_GE(clean_accuracy(result.model, data, eval), 0.99);
}

TEST(Training, OneBatchOneEpochCounters) {
  Dataset data = separable(8);
  Rng init(2);
  auto model = StochasticModel::initialize(small_spec(20, {4}, 2, true, DType::kFloat32), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvBnnApgd);
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.probe_size = 0;
  cfg.inner_attack.m_grad = 2;
  auto result = train_defense(model, data, cfg);
  EXPECT_EQ(result.counters.attack_calls, 1u);
  EXPECT_EQ(result.counters.optimizer_steps, 1u);
}

TEST(Training, ReproducibleInFloat64) {
  Dataset data = separable(20, DType::kFloat64);
  Rng init(3);
  auto model = StochasticModel::initialize(small_spec(20, {6}, 2, true, DType::kFloat64), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvBnnNaive);
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.probe_size = 10;
  cfg.seed = 17;
  auto a = train_defense(model, data, cfg);
  auto b = train_defense(model, data, cfg);
  auto pa = a.model.parameters(), pb = b.model.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(pa[i].bit_equal(pb[i]));
  EXPECT_EQ(a.metrics.size(), 3u);
}

TEST(Training, LossTrendsDownward) {
  Dataset data = separable(16);
  Rng init(4);
  auto model = StochasticModel::initialize(small_spec(20, {8}, 2, true, DType::kFloat32), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvBnnNaive);
  cfg.epochs = 25;
  cfg.batch_size = 8;
  cfg.probe_size = 0;
  cfg.inner_attack.steps = 3;
  auto result = train_defense(model, data, cfg);
  const double n = static_cast<double>(result.metrics.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& m : result.metrics) {
    const double x = static_cast<double>(m.epoch);
    sx += x;
    sy += m.train_loss;
    sxx += x * x;
    sxy += x * m.train_loss;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_LT(slope, 0.0);
}

TEST(Training, AdversarialBatchesAreFeasible) {
  Dataset data = separable(12);
  Rng init(5);
  auto model = StochasticModel::initialize(small_spec(20, {4}, 2, true, DType::kFloat32), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvBnnNaive);
  cfg.epochs = 2;
  cfg.batch_size = 5;
  cfg.probe_size = 0;
  std::size_t checked = 0;
  TrainHooks hooks;
  hooks.on_adversarial_batch = [&](std::size_t, std::size_t, const Tensor& clean, const Tensor& adv) {
    const auto c = clean.to_vector(), a = adv.to_vector();
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_LE(std::abs(a[i] - c[i]), cfg.inner_attack.gamma + 1e-6);
      EXPECT_GE(a[i], 0.0);
      EXPECT_LE(a[i], 1.0);
    }
    ++checked;
  };
  train_defense(model, data, cfg, nullptr, hooks);
  EXPECT_EQ(checked, 10u);
}

TEST(Training, DefenseModelMismatch) {
  Dataset data = separable(4);
  Rng init(6);
  auto det = StochasticModel::initialize(small_spec(20, {}, 2, false, DType::kFloat32), init);
  EXPECT_EQ(code_of([&] { train_defense(det, data, default_train_config(DefenseKind::kAdvBnnNaive)); }),
            ErrorCode::kModelMismatch);
  auto bnn = StochasticModel::initialize(small_spec(20, {}, 2, true, DType::kFloat32), init);
  EXPECT_EQ(code_of([&] { train_defense(bnn, data, default_train_config(DefenseKind::kAdvTraining)); }),
            ErrorCode::kModelMismatch);
}

TEST(Training, NonFiniteLossNamesEpochAndBatch) {
  Dataset data = separable(4);
  auto values = data.inputs.to_vector();
  values[0] = std::numeric_limits<double>::quiet_NaN();
  data.inputs = Tensor::from_values(data.inputs.shape(), values, DType::kFloat32);
  Rng init(7);
  auto model = StochasticModel::initialize(small_spec(20, {}, 2, false, DType::kFloat32), init);
  TrainConfig cfg = default_train_config(DefenseKind::kAdvTraining);
  cfg.inner_attack.gamma = 0;
  cfg.batch_size = 100;
  cfg.probe_size = 0;
  try {
    train_defense(model, data, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    EXPECT_NE(std::string(e.what()).find("epoch 0, batch 0"), std::string::npos) << e.what();
  }
}

TEST(Training, ConfigValidation) {
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.optimizer.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace abnn
