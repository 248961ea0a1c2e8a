/*
 * Copyright 2026 The QCAD Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef QCAD_CORE_RANDOM_HPP_
#define QCAD_CORE_RANDOM_HPP_

#include <cstddef>
#include <cstdint>

namespace qcad {

// SplitMix64 finalizer (Steele, Lea & Flood 2014). Bijective on 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a parent seed and a key.
// sub_seed(s, a) = mix64(s + 0x9e3779b97f4a7c15 * (a + 1)); chaining the
// call keys on several components, e.g. sub_seed(sub_seed(s, row), feature).
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t key) {
  return mix64(seed + 0x9e3779b97f4a7c15ULL * (key + 1));
}

// Counter-based SplitMix64 generator. All distributions below are defined
// here rather than taken from <random> so that every sampled value is
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller; the second variate is discarded so the
  // stream position depends only on the number of calls.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace qcad

#endif  // QCAD_CORE_RANDOM_HPP_
