// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/rng.hpp"

namespace remine {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view key) {
  Rng mixer(seed ^ fnv1a64(key));
  return mixer.next();
}

}  // namespace remine
