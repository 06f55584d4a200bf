#include "engine/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#if defined(__AVX512F__) && defined(__AVX512DQ__)
#include <immintrin.h>
#define IPM_PHILOX_AVX512 1
#endif

namespace ipm::engine::kernels {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline void philox_scalar(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) noexcept {
  for (int r = 0; r < 10; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0;
    const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1;
    c[1] = static_cast<std::uint32_t>(p1);
    c[3] = static_cast<std::uint32_t>(p0);
    c[0] = n0;
    c[2] = n2;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
}

#ifdef IPM_PHILOX_AVX512
inline void mulhilo(__m512i a, __m512i m, __m512i& hi, __m512i& lo) noexcept {
  const __m512i even = _mm512_mul_epu32(a, m);
  const __m512i odd = _mm512_mul_epu32(_mm512_srli_epi64(a, 32), m);
  lo = _mm512_mask_blend_epi32(0xAAAA, even, _mm512_slli_epi64(odd, 32));
  hi = _mm512_mask_blend_epi32(0xAAAA, _mm512_srli_epi64(even, 32), odd);
}

inline __m512d to_unit8(__m256i hi, __m256i lo) noexcept {
  const __m512i h = _mm512_cvtepu32_epi64(hi);
  const __m512i l = _mm512_cvtepu32_epi64(lo);
  const __m512i bits = _mm512_srli_epi64(_mm512_or_si512(_mm512_slli_epi64(h, 32), l), 11);
  return _mm512_mul_pd(_mm512_add_pd(_mm512_cvtepu64_pd(bits), _mm512_set1_pd(0.5)),
                       _mm512_set1_pd(0x1.0p-53));
}

// Sixteen consecutive counters first .. first + 15.
inline void philox16(std::uint32_t first, std::uint32_t c1s, std::uint32_t c2s, std::uint32_t c3s,
                     std::uint32_t k0, std::uint32_t k1, double* u1, double* u2) noexcept {
  __m512i c0 = _mm512_add_epi32(_mm512_set1_epi32(static_cast<int>(first)),
                                _mm512_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15));
  __m512i c1 = _mm512_set1_epi32(static_cast<int>(c1s));
  __m512i c2 = _mm512_set1_epi32(static_cast<int>(c2s));
  __m512i c3 = _mm512_set1_epi32(static_cast<int>(c3s));
  const __m512i m0 = _mm512_set1_epi32(static_cast<int>(kMul0));
  const __m512i m1 = _mm512_set1_epi32(static_cast<int>(kMul1));
  for (int r = 0; r < 10; ++r) {
    __m512i h0, l0, h1, l1;
    mulhilo(c0, m0, h0, l0);
    mulhilo(c2, m1, h1, l1);
    const __m512i n0 = _mm512_xor_si512(_mm512_xor_si512(h1, c1), _mm512_set1_epi32(static_cast<int>(k0)));
    const __m512i n2 = _mm512_xor_si512(_mm512_xor_si512(h0, c3), _mm512_set1_epi32(static_cast<int>(k1)));
    c0 = n0;
    c1 = l1;
    c2 = n2;
    c3 = l0;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  _mm512_storeu_pd(u1, to_unit8(_mm512_castsi512_si256(c0), _mm512_castsi512_si256(c1)));
  _mm512_storeu_pd(u1 + 8, to_unit8(_mm512_extracti64x4_epi64(c0, 1), _mm512_extracti64x4_epi64(c1, 1)));
  _mm512_storeu_pd(u2, to_unit8(_mm512_castsi512_si256(c2), _mm512_castsi512_si256(c3)));
  _mm512_storeu_pd(u2 + 8, to_unit8(_mm512_extracti64x4_epi64(c2, 1), _mm512_extracti64x4_epi64(c3, 1)));
}
#endif

}  // namespace

void uniform_pairs(std::uint32_t first, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3,
                   std::uint32_t k0, std::uint32_t k1, std::size_t count, double* u1, double* u2) {
  std::size_t i = 0;
#ifdef IPM_PHILOX_AVX512
  for (; i + 16 <= count; i += 16) {
    philox16(first + static_cast<std::uint32_t>(i), c1, c2, c3, k0, k1, u1 + i, u2 + i);
  }
#endif
  for (; i < count; ++i) {
    std::uint32_t c[4] = {first + static_cast<std::uint32_t>(i), c1, c2, c3};
    philox_scalar(c, k0, k1);
    u1[i] = to_unit(c[0], c[1]);
    u2[i] = to_unit(c[2], c[3]);
  }
}

// Every element goes through the same fixed-width block so that a value does
// not depend on where it falls relative to a vector epilogue.
constexpr std::size_t kBlock = 8;

namespace {

inline void box_muller_block(const double* __restrict u1, const double* __restrict u2,
                             double* __restrict g1, double* __restrict g2) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  // sin is recovered from cos so that GCC does not fuse into a scalar sincos.
#pragma omp simd
  for (std::size_t i = 0; i < kBlock; ++i) {
    const double radius = std::sqrt(-2.0 * std::log(u1[i]));
    const double c = std::cos(two_pi * u2[i]);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    g1[i] = radius * c;
    g2[i] = radius * (u2[i] < 0.5 ? s : -s);
  }
}

inline void exp_block(const double* __restrict log_w, double shift, double* __restrict w) {
#pragma omp simd
  for (std::size_t i = 0; i < kBlock; ++i) w[i] = std::exp(std::max(log_w[i] - shift, -800.0));
}

inline void neg_log_block(const double* __restrict u, double* __restrict out) {
#pragma omp simd
  for (std::size_t i = 0; i < kBlock; ++i) out[i] = -std::log(u[i]);
}

}  // namespace

void box_muller(const double* u1, const double* u2, std::size_t n, double* g1, double* g2) {
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) box_muller_block(u1 + i, u2 + i, g1 + i, g2 + i);
  if (i < n) {
    double a[kBlock], b[kBlock], x[kBlock], y[kBlock];
    std::fill(a, a + kBlock, 0.5);
    std::fill(b, b + kBlock, 0.5);
    std::copy(u1 + i, u1 + n, a);
    std::copy(u2 + i, u2 + n, b);
    box_muller_block(a, b, x, y);
    std::copy(x, x + (n - i), g1 + i);
    std::copy(y, y + (n - i), g2 + i);
  }
}

double exp_shifted(const double* log_w, std::size_t n, double shift, double* w, double* sum_sq) {
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) exp_block(log_w + i, shift, w + i);
  if (i < n) {
    double a[kBlock], x[kBlock];
    std::fill(a, a + kBlock, shift);
    std::copy(log_w + i, log_w + n, a);
    exp_block(a, shift, x);
    std::copy(x, x + (n - i), w + i);
  }
  // Fixed-order lane sums, independent of the instruction set.
  double sum[kBlock] = {}, sq[kBlock] = {};
  i = 0;
  for (; i + kBlock <= n; i += kBlock) {
    for (std::size_t k = 0; k < kBlock; ++k) {
      sum[k] += w[i + k];
      sq[k] += w[i + k] * w[i + k];
    }
  }
  for (; i < n; ++i) {
    sum[0] += w[i];
    sq[0] += w[i] * w[i];
  }
  double total = 0.0, total_sq = 0.0;
  for (std::size_t k = 0; k < kBlock; ++k) {
    total += sum[k];
    total_sq += sq[k];
  }
  *sum_sq = total_sq;
  return total;
}

void neg_log(const double* u, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + kBlock <= n; i += kBlock) neg_log_block(u + i, out + i);
  if (i < n) {
    double a[kBlock], x[kBlock];
    std::fill(a, a + kBlock, 0.5);
    std::copy(u + i, u + n, a);
    neg_log_block(a, x);
    std::copy(x, x + (n - i), out + i);
  }
}

}  // namespace ipm::engine::kernels
