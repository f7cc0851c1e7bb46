// SPDX-License-Identifier: Apache-2.0
//
// wbcr-sim: wideband cognitive-radio communication and sensing simulator
// Copyright (C) 2026 wbcr-sim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace wbcr {

// All randomness in the simulator is drawn from explicitly seeded streams.
// Every consumer derives its own child seed from (parent seed, tags), so
// results are independent of scheduling and identical in serial and
// parallel runs.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base) { return splitmix64(base); }

template <typename... Rest>
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, Rest... rest) {
  return derive_seed(splitmix64(base ^ splitmix64(tag)), rest...);
}

template <typename... Rest>
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, Rest... rest) {
  return derive_seed(splitmix64(base ^ hash_tag(tag)), rest...);
}

/// Deterministic random stream. Samplers are implemented on top of raw
/// 64-bit draws (not std:: distributions) so that output is identical
/// across standard libraries and build modes.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  /// Uniform double strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n).
  std::uint64_t index(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for our n, but stay exact.
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x = u64();
    while (x >= limit) x = u64();
    return x % n;
  }

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Circularly-symmetric complex Gaussian with unit variance, CN(0, 1).
  std::complex<double> cgauss() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wbcr
