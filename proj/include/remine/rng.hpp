// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string_view>

namespace remine {

// splitmix64. Deterministic across platforms and standard libraries, which
// std::mt19937 + std::uniform_*_distribution are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

std::uint64_t fnv1a64(std::string_view text);

/// Independent substream seed for a keyed entity (e.g. one image), so that
/// per-entity sampling is order-independent under parallel generation.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view key);

}  // namespace remine
