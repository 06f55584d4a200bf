#pragma once

// Counter layout shared by every consumer of the Philox streams:
// counter = (index, domain | lane << 8, step low, step high), key = seed.

#include <cstdint>

#include "ipm/engine/rng.hpp"

namespace ipm::engine::detail {

struct StreamWords {
  std::uint32_t c1, c2, c3, k0, k1;
};

inline StreamWords stream_words(StreamKey key, Domain domain, std::uint32_t lane) noexcept {
  return {static_cast<std::uint32_t>(domain) | (lane << 8),
          static_cast<std::uint32_t>(key.step), static_cast<std::uint32_t>(key.step >> 32),
          static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)};
}

}  // namespace ipm::engine::detail
