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

#include "abnn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "abnn/config.hpp"
#include "abnn/error.hpp"

namespace abnn {

namespace {

constexpr char kMagic[4] = {'A', 'B', 'N', 'N'};
constexpr std::uint32_t kMaxRank = 8;

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

void put_bytes(std::string& out, const std::string& bytes) { out += bytes; }

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <class U>
  U get(const char* what) {
    need(sizeof(U), what);
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::string bytes(std::uint64_t n, const char* what) {
    need(n, what);
    std::string out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n, const char* what) {
    if (n > bytes_.size() - pos_) {
      fail(ErrorCode::kTruncated, std::string("checkpoint truncated while reading ") + what);
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

template <class T>
void put_payload(std::string& out, const Tensor& t) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  for (T v : t.data<T>()) put_le(out, std::bit_cast<U>(v));
}

template <class T>
Tensor get_payload(Reader& in, const Shape& shape) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const std::size_t n = numel(shape);
  std::vector<T> values(n);
  for (auto& v : values) v = std::bit_cast<T>(in.get<U>("tensor payload"));
  return Tensor::from_vector<T>(shape, std::move(values));
}

}  // namespace

std::string serialize_checkpoint(const StochasticModel& model, const std::string& provenance) {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  const std::string arch = model_spec_to_text(model.spec());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(arch.size()));
  put_bytes(out, arch);
  const auto params = model.named_parameters();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, value] : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    put_bytes(out, name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
    for (auto d : value.shape()) put_le<std::uint64_t>(out, d);
    out.push_back(static_cast<char>(value.dtype()));
    dispatch(value.dtype(), [&]<class T>() { put_payload<T>(out, value); });
  }
  put_le<std::uint64_t>(out, provenance.size());
  put_bytes(out, provenance);
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (std::memcmp(bytes.data(), kMagic, std::min<std::size_t>(bytes.size(), 4)) != 0) {
    fail(ErrorCode::kBadMagic, "not an ABNN checkpoint (bad magic)");
  }
  in.bytes(4, "magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    fail(ErrorCode::kUnsupportedVersion,
         "unsupported checkpoint version " + std::to_string(version) + " (expected " +
             std::to_string(kCheckpointVersion) + ")");
  }
  const auto arch_len = in.get<std::uint32_t>("architecture length");
  const ModelSpec spec = model_spec_from_text(in.bytes(arch_len, "architecture"));

  std::map<std::string, Tensor> records;
  const auto count = in.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = in.get<std::uint32_t>("tensor name length");
    std::string name = in.bytes(name_len, "tensor name");
    const auto rank = in.get<std::uint32_t>("tensor rank");
    if (rank == 0 || rank > kMaxRank) {
      fail(ErrorCode::kModelMismatch, "tensor '" + name + "' has invalid rank " + std::to_string(rank));
    }
    Shape shape;
    std::uint64_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      const auto d = in.get<std::uint64_t>("tensor dims");
      if (d == 0 || d > bytes.size()) {
        fail(ErrorCode::kTruncated, "tensor '" + name + "' has an implausible dimension");
      }
      total *= d;
      if (total > bytes.size()) {
        fail(ErrorCode::kTruncated, "tensor '" + name + "' is larger than the file");
      }
      shape.push_back(static_cast<std::size_t>(d));
    }
    const auto tag = in.get<std::uint8_t>("dtype tag");
    if (tag > 1) fail(ErrorCode::kModelMismatch, "tensor '" + name + "' has unknown dtype tag");
    Tensor value;
    dispatch(static_cast<DType>(tag), [&]<class T>() { value = get_payload<T>(in, shape); });
    if (!records.emplace(name, std::move(value)).second) {
      fail(ErrorCode::kModelMismatch, "duplicate tensor record '" + name + "'");
    }
  }
  const auto prov_len = in.get<std::uint64_t>("provenance length");
  std::string provenance = in.bytes(prov_len, "provenance");
  if (!in.done()) fail(ErrorCode::kModelMismatch, "trailing bytes after checkpoint provenance");

  const std::size_t n_layers = spec.hidden.size() + 1;
  std::vector<Layer> layers(n_layers);
  auto take = [&](const std::string& name) {
    auto it = records.find(name);
    if (it == records.end()) fail(ErrorCode::kModelMismatch, "checkpoint is missing '" + name + "'");
    Tensor t = std::move(it->second);
    records.erase(it);
    return t;
  };
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    layers[l].prior_sigma = spec.prior_sigma;
    layers[l].weight_mu = take(p + "weight_mu");
    layers[l].bias_mu = take(p + "bias_mu");
    if (spec.stochastic) {
      layers[l].weight_rho = take(p + "weight_rho");
      layers[l].bias_rho = take(p + "bias_rho");
    }
  }
  if (!records.empty()) {
    fail(ErrorCode::kModelMismatch, "unexpected tensor record '" + records.begin()->first + "'");
  }
  return Checkpoint{StochasticModel(spec, std::move(layers)), std::move(provenance)};
}

void save_checkpoint(const StochasticModel& model, const std::string& provenance,
                     const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model, provenance);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write checkpoint '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed for checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace abnn
