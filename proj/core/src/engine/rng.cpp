#include "ipm/engine/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "engine/kernels.hpp"
#include "engine/streams.hpp"

namespace ipm::engine {
using detail::stream_words;

Philox4x32::Block Philox4x32::generate(Block c, Key key) noexcept {
  std::uint32_t k0 = key[0], k1 = key[1];
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
         static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return c;
}

void fill_uniform_pairs(StreamKey key, Domain domain, std::uint32_t lane, std::uint64_t first,
                        std::span<double> u1, std::span<double> u2) {
  const auto w = stream_words(key, domain, lane);
  kernels::uniform_pairs(static_cast<std::uint32_t>(first), w.c1, w.c2, w.c3, w.k0, w.k1,
                         std::min(u1.size(), u2.size()), u1.data(), u2.data());
}

void fill_gaussians(StreamKey key, Domain domain, std::size_t rows, int dim, std::span<double> out) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> u1(rows), u2(rows), g1(rows), g2(rows);
  const std::size_t pairs = (d + 1) / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto w = stream_words(key, domain, static_cast<std::uint32_t>(p));
    kernels::uniform_pairs(0, w.c1, w.c2, w.c3, w.k0, w.k1, rows, u1.data(), u2.data());
    kernels::box_muller(u1.data(), u2.data(), rows, g1.data(), g2.data());
    const std::size_t col = 2 * p;
    if (col + 1 < d) {
      for (std::size_t i = 0; i < rows; ++i) {
        out[i * d + col] = g1[i];
        out[i * d + col + 1] = g2[i];
      }
    } else {
      for (std::size_t i = 0; i < rows; ++i) out[i * d + col] = g1[i];
    }
  }
}

RandomStream::RandomStream(StreamKey key, Domain domain, std::uint32_t lane) noexcept
    : key_(key), domain_(domain), lane_(lane) {}

void RandomStream::refill() noexcept {
  const auto w = stream_words(key_, domain_, lane_);
  kernels::uniform_pairs(static_cast<std::uint32_t>(index_), w.c1, w.c2, w.c3, w.k0, w.k1, 1,
                         &uniforms_[0], &uniforms_[1]);
  ++index_;
}

double RandomStream::uniform() noexcept {
  if (next_uniform_ == 2) {
    refill();
    next_uniform_ = 0;
  }
  return uniforms_[next_uniform_++];
}

double RandomStream::gaussian() noexcept {
  if (next_gaussian_ == 2) {
    const double a = uniform();
    const double b = uniform();
    kernels::box_muller(&a, &b, 1, &gaussians_[0], &gaussians_[1]);
    next_gaussian_ = 0;
  }
  return gaussians_[next_gaussian_++];
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace ipm::engine
