#pragma once

// Hot loops shared by the engine. Compiled with -ffast-math so that libmvec
// vectorizes exp/log/cos; callers are responsible for finiteness checks.

#include <cstddef>
#include <cstdint>

namespace ipm::engine::kernels {

/// Philox4x32-10 blocks for counters (first + i, c1, c2, c3) converted to two
/// 53-bit uniforms in (0, 1) per block.
void uniform_pairs(std::uint32_t first, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3,
                   std::uint32_t k0, std::uint32_t k1, std::size_t count, double* u1, double* u2);

/// Box-Muller: (u1, u2) -> two independent standard normals.
void box_muller(const double* u1, const double* u2, std::size_t n, double* g1, double* g2);

/// w[i] = exp(log_w[i] - shift); returns sum(w) and stores sum(w^2) in *sum_sq.
double exp_shifted(const double* log_w, std::size_t n, double shift, double* w, double* sum_sq);

/// out[i] = -log(u[i]).
void neg_log(const double* u, std::size_t n, double* out);

}  // namespace ipm::engine::kernels
