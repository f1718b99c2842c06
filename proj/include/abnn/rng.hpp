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

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>

namespace abnn {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
std::uint64_t mix_seed(std::uint64_t value);

// Derives an independent stream seed from a parent seed and a path of
// stream identifiers, e.g. derive_seed(seed, {kAttackStream, example}).
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t seed,
                    std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(seed, path));
}

// Standard-normal draws (ziggurat) written in order.
template <class T>
void fill_normal(std::span<T> out, Rng& rng) {
  boost::random::normal_distribution<T> dist(T(0), T(1));
  for (auto& v : out) v = dist(rng);
}

// Stream tags used across modules.
namespace stream {
inline constexpr std::uint64_t kData = 0x64617461;
inline constexpr std::uint64_t kInit = 0x696e6974;
inline constexpr std::uint64_t kTrain = 0x74726e;
inline constexpr std::uint64_t kAttack = 0x61746b;
inline constexpr std::uint64_t kEval = 0x6576616c;
inline constexpr std::uint64_t kShuffle = 0x736866;
inline constexpr std::uint64_t kProbe = 0x707262;
}  // namespace stream

}  // namespace abnn
