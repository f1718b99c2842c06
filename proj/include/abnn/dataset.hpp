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
#include <filesystem>
#include <span>
#include <vector>

#include "abnn/model.hpp"
#include "abnn/tensor.hpp"

namespace abnn {

struct Dataset {
  Tensor inputs;  // [n, d], values in [0, 1]
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return inputs.shape()[1]; }

  Dataset select(std::span<const std::size_t> indices) const;
  Dataset head(std::size_t count) const;
  Batch batch(std::span<const std::size_t> indices) const;
  // Row i as a [1, d] tensor.
  Tensor row(std::size_t i) const;
};

// Gaussian blobs. Each class gets a mean 0.5 + (sep_j / 2) * sign_cj per
// coordinate, where sep_j is robust_separation on the first robust_dims
// coordinates and separation elsewhere; the sign patterns are drawn from the
// seed (for two classes the second pattern is the negation of the first).
// Samples are mean + sigma * N(0, I), clamped to [0, 1], and interleaved by
// class so every prefix is balanced.
struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t dim = 20;
  double separation = 0.5;
  double sigma = 0.05;
  std::size_t per_class = 100;
  std::size_t robust_dims = 0;
  double robust_separation = 0.0;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed,
                      DType dtype = DType::kFloat32);

// Class means used by gen_synthetic, row-major [classes, dim].
std::vector<double> synthetic_means(const SyntheticSpec& spec,
                                    std::uint64_t seed);

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// IDX u8 images (rank 3) and labels (rank 1); pixels scaled by 1/255.
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels,
                 DType dtype = DType::kFloat32);

void write_idx_images(const std::filesystem::path& path, std::size_t count,
                      std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels);
void write_idx_labels(const std::filesystem::path& path,
                      std::span<const std::uint8_t> labels);

// Deterministic shuffle-and-split; the first part holds 1 - test_fraction.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data,
                                          double test_fraction,
                                          std::uint64_t seed);

}  // namespace abnn
