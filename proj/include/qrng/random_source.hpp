// Copyright 2026 The qrng-bs Authors.
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
#include <utility>
#include <vector>

namespace qrng {

/// Deterministic simulation entropy.
///
/// Wraps a 64-bit Mersenne Twister whose state is expanded from a key with
/// std::seed_seq. The key of a root source is its 64-bit seed; the key of
/// substream i is the parent key with i appended, so substream(i) depends
/// only on (master seed, i) and never on how many draws the parent made.
/// Both std::mt19937_64 and std::seed_seq are fully specified by the
/// standard, which keeps streams identical across toolchains.
///
/// A RandomSource may be moved between threads but must not be shared.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : key_{split(seed)} { reseed(); }

  /// Independent stream re-keyed by (this key, index).
  [[nodiscard]] RandomSource substream(std::uint64_t index) const {
    auto key = key_;
    // Separator word keeps {s}+{i} distinct from a root seeded with the
    // concatenated words.
    key.push_back(0x9E3779B9u);
    return RandomSource(std::move(key), index);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(key_[0]) | (static_cast<std::uint64_t>(key_[1]) << 32);
  }

  /// Words fed to std::seed_seq; exposed for diagnostics and tests.
  const std::vector<std::uint32_t>& key() const { return key_; }

 private:
  RandomSource(std::vector<std::uint32_t> key, std::uint64_t index) : key_{std::move(key)} {
    auto words = split(index);
    key_.insert(key_.end(), words.begin(), words.end());
    reseed();
  }

  static std::vector<std::uint32_t> split(std::uint64_t v) {
    return {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32)};
  }

  void reseed() {
    std::seed_seq seq(key_.begin(), key_.end());
    engine_.seed(seq);
  }

  std::vector<std::uint32_t> key_;
  std::mt19937_64 engine_;
};

}  // namespace qrng
