#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace ipm::engine {

/// Identifies one random stream: a master seed and a step (or sub-stream) index.
/// Within a stream, draws are addressed by (domain, lane, index) so that every
/// particle's randomness is fixed independently of evaluation order.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

/// Separates the uses of randomness within one step.
enum class Domain : std::uint8_t {
  initial = 1,
  propagate = 2,
  resample = 3,
  orthogonal = 4,
  entropy = 5,
  user = 16,
};

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key) noexcept;
};

/// Fills u1[i], u2[i] with independent uniforms on the open interval (0, 1),
/// 53 bits each, drawn from counter (first + i, domain | lane << 8, step).
void fill_uniform_pairs(StreamKey key, Domain domain, std::uint32_t lane, std::uint64_t first,
                        std::span<double> u1, std::span<double> u2);

/// Standard Gaussian draws for `rows` particles of dimension `dim`, row-major.
/// Coordinates (2p, 2p + 1) of row i come from one Box-Muller pair at lane p.
void fill_gaussians(StreamKey key, Domain domain, std::size_t rows, int dim, std::span<double> out);

/// Sequential draws from one addressed stream; for small, non-hot sampling.
class RandomStream {
 public:
  RandomStream(StreamKey key, Domain domain, std::uint32_t lane = 0) noexcept;

  double uniform() noexcept;
  double gaussian() noexcept;

 private:
  void refill() noexcept;

  StreamKey key_;
  Domain domain_;
  std::uint32_t lane_;
  std::uint64_t index_ = 0;
  std::array<double, 2> uniforms_{};
  std::array<double, 2> gaussians_{};
  int next_uniform_ = 2;
  int next_gaussian_ = 2;
};

/// SplitMix64 finalizer; derives independent child seeds from a parent seed.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace ipm::engine
