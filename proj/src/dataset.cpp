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

#include "abnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>

#include "abnn/rng.hpp"

namespace abnn {

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  const std::size_t d = dim();
  auto all = inputs.to_vector();
  std::vector<double> rows;
  rows.reserve(indices.size() * d);
  Dataset out;
  out.classes = classes;
  for (auto i : indices) {
    if (i >= size()) {
      fail(ErrorCode::kInvalidArgument, "dataset index " + std::to_string(i) +
                                            " out of range");
    }
    rows.insert(rows.end(), all.begin() + static_cast<std::ptrdiff_t>(i * d),
                all.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    out.labels.push_back(labels[i]);
  }
  if (indices.empty()) fail(ErrorCode::kInvalidArgument, "empty selection");
  out.inputs = Tensor::from_values({indices.size(), d}, rows, inputs.dtype());
  return out;
}

Dataset Dataset::head(std::size_t count) const {
  std::vector<std::size_t> idx(std::min(count, size()));
  std::iota(idx.begin(), idx.end(), 0);
  return select(idx);
}

Batch Dataset::batch(std::span<const std::size_t> indices) const {
  Dataset sub = select(indices);
  return Batch{sub.inputs, std::move(sub.labels), size()};
}

Tensor Dataset::row(std::size_t i) const {
  const std::size_t d = dim();
  return dispatch(inputs.dtype(), [&]<class T>() {
    auto all = inputs.data<T>();
    std::vector<T> r(all.begin() + static_cast<std::ptrdiff_t>(i * d),
                     all.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    return Tensor::from_vector<T>({1, d}, std::move(r));
  });
}

void SyntheticSpec::validate() const {
  if (classes < 2) fail(ErrorCode::kInvalidArgument, "synthetic: need at least 2 classes");
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "synthetic: dim must be positive");
  if (per_class == 0) fail(ErrorCode::kInvalidArgument, "synthetic: per_class must be positive");
  if (!(separation > 0)) fail(ErrorCode::kInvalidArgument, "synthetic: separation must be > 0");
  if (!(sigma > 0)) fail(ErrorCode::kInvalidArgument, "synthetic: sigma must be > 0");
  if (robust_dims > dim) fail(ErrorCode::kInvalidArgument, "synthetic: robust_dims exceeds dim");
  if (robust_dims > 0 && !(robust_separation > 0)) {
    fail(ErrorCode::kInvalidArgument, "synthetic: robust_separation must be > 0");
  }
}

std::vector<double> synthetic_means(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_rng(seed, {stream::kData, 0});
  std::bernoulli_distribution coin(0.5);
  std::vector<double> means(spec.classes * spec.dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      double sign;
      if (spec.classes == 2 && c == 1) {
        sign = means[j] > 0.5 ? -1.0 : 1.0;
      } else {
        sign = coin(rng) ? 1.0 : -1.0;
      }
      const double sep = j < spec.robust_dims ? spec.robust_separation : spec.separation;
      means[c * spec.dim + j] = 0.5 + 0.5 * sep * sign;
    }
  }
  return means;
}

Dataset gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed, DType dtype) {
  const auto means = synthetic_means(spec, seed);
  Rng rng = make_rng(seed, {stream::kData, 1});
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = spec.classes * spec.per_class;
  std::vector<double> x(n * spec.dim);
  Dataset out;
  out.classes = spec.classes;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % spec.classes;
    out.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < spec.dim; ++j) {
      x[i * spec.dim + j] =
          std::clamp(means[c * spec.dim + j] + spec.sigma * noise(rng), 0.0, 1.0);
    }
  }
  out.inputs = Tensor::from_values({n, spec.dim}, x, dtype);
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    fail(ErrorCode::kTruncated, "'" + path.string() + "': header truncated");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(const std::vector<std::uint8_t>& bytes, std::uint32_t expected,
                 const std::filesystem::path& path) {
  if (bytes.size() < 4) {
    fail(ErrorCode::kBadMagic, "'" + path.string() + "': too short for an IDX header");
  }
  std::uint32_t magic = read_be32(bytes, 0, path);
  if (magic != expected) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad IDX magic 0x%08x (expected 0x%08x)", magic, expected);
    fail(ErrorCode::kBadMagic, "'" + path.string() + "': " + buf);
  }
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, DType dtype) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  check_magic(images, kIdxImageMagic, images_path);
  check_magic(labels, kIdxLabelMagic, labels_path);

  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  const std::size_t pixels = rows * cols;
  if (count == 0 || pixels == 0) {
    fail(ErrorCode::kInvalidArgument, "'" + images_path.string() + "': empty image set");
  }
  if (images.size() < 16 + count * pixels) {
    fail(ErrorCode::kTruncated, "'" + images_path.string() + "': expected " +
                                    std::to_string(count * pixels) + " pixel bytes, found " +
                                    std::to_string(images.size() - 16));
  }
  if (labels.size() < 8 + label_count) {
    fail(ErrorCode::kTruncated, "'" + labels_path.string() + "': expected " +
                                    std::to_string(label_count) + " label bytes, found " +
                                    std::to_string(labels.size() - 8));
  }
  if (label_count != count) {
    fail(ErrorCode::kCountMismatch, "image count " + std::to_string(count) +
                                        " does not match label count " +
                                        std::to_string(label_count));
  }

  std::vector<double> x(count * pixels);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = images[16 + i] / 255.0;
  Dataset out;
  out.inputs = Tensor::from_values({count, pixels}, x, dtype);
  out.labels.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    out.labels[i] = labels[8 + i];
    max_label = std::max(max_label, out.labels[i]);
  }
  out.classes = std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1);
  return out;
}

void write_idx_images(const std::filesystem::path& path, std::size_t count,
                      std::size_t rows, std::size_t cols,
                      std::span<const std::uint8_t> pixels) {
  if (pixels.size() != count * rows * cols) {
    fail(ErrorCode::kShapeMismatch, "write_idx_images: pixel count does not match dims");
  }
  std::vector<std::uint8_t> bytes;
  put_be32(bytes, kIdxImageMagic);
  put_be32(bytes, static_cast<std::uint32_t>(count));
  put_be32(bytes, static_cast<std::uint32_t>(rows));
  put_be32(bytes, static_cast<std::uint32_t>(cols));
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_file(path, bytes);
}

void write_idx_labels(const std::filesystem::path& path,
                      std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> bytes;
  put_be32(bytes, kIdxLabelMagic);
  put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
  bytes.insert(bytes.end(), labels.begin(), labels.end());
  write_file(path, bytes);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double test_fraction,
                                          std::uint64_t seed) {
  if (!(test_fraction > 0 && test_fraction < 1)) {
    fail(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(seed, {stream::kShuffle});
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng() % i]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * data.size()));
  if (n_test == 0 || n_test >= data.size()) {
    fail(ErrorCode::kInvalidArgument, "split leaves an empty partition");
  }
  std::span<const std::size_t> all(idx);
  return {data.select(all.subspan(0, idx.size() - n_test)),
          data.select(all.subspan(idx.size() - n_test))};
}

}  // namespace abnn
