// Copyright 2026 The iqastack Authors. All Rights Reserved.
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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <utility>

namespace iqa {

/// splitmix64 finalizer; the building block for every seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over bytes; stable across platforms, used for path-derived seeds
/// and config fingerprints.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based generator: the value for (stream, index) does not depend on
/// how many values were drawn before it. Pixel-parallel noise uses this so
/// that outputs are identical for any thread count.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(mix64(seed)) {}

  constexpr std::uint64_t bits(std::uint64_t index, std::uint64_t stream = 0) const {
    return mix64(seed_ ^ mix64(index * 0x2545f4914f6cdd1dULL + stream));
  }

  /// Uniform in [0, 1) with 53 bits.
  double uniform(std::uint64_t index, std::uint64_t stream = 0) const {
    return static_cast<double>(bits(index, stream) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two decorrelated streams.
  double normal(std::uint64_t index, std::uint64_t stream = 0) const {
    const double u1 = 1.0 - uniform(index, 2 * stream + 0x51);
    const double u2 = uniform(index, 2 * stream + 0x52);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
};

using Rng = std::mt19937_64;

/// Uniform integer in [0, n) drawn from a sequential engine. Written out
/// instead of std::uniform_int_distribution so that streams are identical
/// across standard library implementations.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_between(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Fisher-Yates with uniform_below; deterministic given the engine state.
template <typename Container>
void shuffle_in_place(Container& c, Rng& rng) {
  for (std::size_t i = c.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, i);
    std::swap(c[i - 1], c[j]);
  }
}

}  // namespace iqa
