// Copyright 2026 The spotflow Authors
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
#include <vector>

namespace spotflow {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds from a root
// seed and a tuple of indices.
constexpr uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t a) {
  return MixSeed(seed ^ MixSeed(a + 0x632be59bd9b4e019ULL));
}

constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b) {
  return DeriveSeed(DeriveSeed(seed, a), b);
}

constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b,
                              uint64_t c) {
  return DeriveSeed(DeriveSeed(seed, a, b), c);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) without modulo bias (Lemire).
inline uint64_t UniformBelow(Rng& rng, uint64_t bound) {
  __uint128_t m = static_cast<__uint128_t>(rng()) * bound;
  auto low = static_cast<uint64_t>(m);
  if (low < bound) {
    const uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>(rng()) * bound;
      low = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

// Fisher-Yates permutation of [0, n).
std::vector<uint32_t> RandomPermutation(size_t n, uint64_t seed);

}  // namespace spotflow
