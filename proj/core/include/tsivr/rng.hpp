// Copyright 2026 The tsivr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace tsivr {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for one trajectory, a pure function of its coordinates in the run.
/// Batch sampling order and thread count never change the streams.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t inner,
                          std::uint64_t index) noexcept;

inline Rng make_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t inner,
                       std::uint64_t index) {
  return Rng(stream_seed(seed, epoch, inner, index));
}

/// Uniform double in [0, 1) built from the top 53 bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller on uniform01, so draws do not depend on the
/// standard library's distribution implementation.
double standard_normal(Rng& rng);

}  // namespace tsivr
