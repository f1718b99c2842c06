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

// Checkpoint layout (all integers little-endian):
//
//   "ABNN"                      magic
//   u32 version                 kCheckpointVersion
//   u32 n, n bytes              architecture record (JSON)
//   u32 count                   tensor records, each:
//     u32 n, n bytes            name
//     u32 rank, rank x u64      dims
//     u8 dtype                  0 = float32, 1 = float64
//     payload                   numel values, little-endian IEEE 754
//   u64 n, n bytes              provenance (run config text)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "abnn/model.hpp"

namespace abnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  StochasticModel model;
  std::string provenance;
};

std::string serialize_checkpoint(const StochasticModel& model, const std::string& provenance);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const StochasticModel& model, const std::string& provenance,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace abnn
