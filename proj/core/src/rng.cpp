#include "serw/rng.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define SERW_X86_DISPATCH 1
#include <immintrin.h>
#endif

namespace serw {

namespace {

void fill_scalar(const CounterRng& rng, std::uint64_t stream, std::uint64_t first,
                 std::size_t count, double* move, double* xi) {
  for (std::size_t i = 0; i < count; ++i) {
    const StepDraw d = rng.draw(stream, first + i);
    move[i] = d.move;
    xi[i] = d.xi;
  }
}

#ifdef SERW_X86_DISPATCH

// Lanes hold one block word each in the low 32 bits of a 64-bit lane, so
// mul_epu32 is exactly Philox's 32x32->64 multiply. Upper-half garbage from
// the previous round only ever reaches the next multiply, which ignores it.
constexpr int kAvx512Chains = 4;
constexpr std::size_t kAvx512Blocks = 8 * kAvx512Chains;

__attribute__((target("avx512f,avx512dq"))) void fill_avx512(const CounterRng& rng,
                                                             std::uint64_t stream,
                                                             std::uint64_t first, std::size_t count,
                                                             double* move, double* xi) {
  const auto key = rng.key();
  const __m512i m0 = _mm512_set1_epi64(0xD2511F53u);
  const __m512i m1 = _mm512_set1_epi64(0xCD9E8D57u);
  const __m512i low = _mm512_set1_epi64(0xFFFFFFFFu);
  const __m512i iota = _mm512_setr_epi64(0, 1, 2, 3, 4, 5, 6, 7);
  const __m512i s_lo = _mm512_set1_epi64(static_cast<std::uint32_t>(stream));
  const __m512i s_hi = _mm512_set1_epi64(static_cast<std::uint32_t>(stream >> 32));
  const __m512d scale = _mm512_set1_pd(0x1.0p-53);

  std::size_t done = 0;
  for (; done + kAvx512Blocks <= count; done += kAvx512Blocks) {
    __m512i c0[kAvx512Chains], c1[kAvx512Chains], c2[kAvx512Chains], c3[kAvx512Chains];
    for (int u = 0; u < kAvx512Chains; ++u) {
      const __m512i c = _mm512_add_epi64(
          _mm512_set1_epi64(static_cast<long long>(first + done + 8 * u)), iota);
      c0[u] = _mm512_and_si512(c, low);
      c1[u] = _mm512_srli_epi64(c, 32);
      c2[u] = s_lo;
      c3[u] = s_hi;
    }
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
      }
      const __m512i kk0 = _mm512_set1_epi64(k0);
      const __m512i kk1 = _mm512_set1_epi64(k1);
      for (int u = 0; u < kAvx512Chains; ++u) {
        const __m512i p0 = _mm512_mul_epu32(c0[u], m0);
        const __m512i p1 = _mm512_mul_epu32(c2[u], m1);
        const __m512i n0 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p1, 32), c1[u], kk0, 0x96);
        const __m512i n2 = _mm512_ternarylogic_epi64(_mm512_srli_epi64(p0, 32), c3[u], kk1, 0x96);
        c1[u] = p1;
        c3[u] = p0;
        c0[u] = n0;
        c2[u] = n2;
      }
    }
    for (int u = 0; u < kAvx512Chains; ++u) {
      const __m512i w0 = _mm512_or_si512(_mm512_slli_epi64(c1[u], 32), _mm512_and_si512(c0[u], low));
      const __m512i w1 = _mm512_or_si512(_mm512_slli_epi64(c3[u], 32), _mm512_and_si512(c2[u], low));
      _mm512_storeu_pd(move + done + 8 * u,
                       _mm512_mul_pd(_mm512_cvtepu64_pd(_mm512_srli_epi64(w0, 11)), scale));
      _mm512_storeu_pd(xi + done + 8 * u,
                       _mm512_mul_pd(_mm512_cvtepu64_pd(_mm512_srli_epi64(w1, 11)), scale));
    }
  }
  fill_scalar(rng, stream, first + done, count - done, move + done, xi + done);
}

constexpr int kAvx2Chains = 4;
constexpr std::size_t kAvx2Blocks = 4 * kAvx2Chains;

__attribute__((target("avx2"))) void fill_avx2(const CounterRng& rng, std::uint64_t stream,
                                               std::uint64_t first, std::size_t count,
                                               double* move, double* xi) {
  const auto key = rng.key();
  const __m256i m0 = _mm256_set1_epi64x(0xD2511F53u);
  const __m256i m1 = _mm256_set1_epi64x(0xCD9E8D57u);
  const __m256i low = _mm256_set1_epi64x(0xFFFFFFFFu);
  const __m256i iota = _mm256_setr_epi64x(0, 1, 2, 3);
  const __m256i s_lo = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream));
  const __m256i s_hi = _mm256_set1_epi64x(static_cast<std::uint32_t>(stream >> 32));

  std::size_t done = 0;
  for (; done + kAvx2Blocks <= count; done += kAvx2Blocks) {
    __m256i c0[kAvx2Chains], c1[kAvx2Chains], c2[kAvx2Chains], c3[kAvx2Chains];
    for (int u = 0; u < kAvx2Chains; ++u) {
      const __m256i c = _mm256_add_epi64(
          _mm256_set1_epi64x(static_cast<long long>(first + done + 4 * u)), iota);
      c0[u] = _mm256_and_si256(c, low);
      c1[u] = _mm256_srli_epi64(c, 32);
      c2[u] = s_lo;
      c3[u] = s_hi;
    }
    std::uint32_t k0 = key[0];
    std::uint32_t k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
      }
      const __m256i kk0 = _mm256_set1_epi64x(k0);
      const __m256i kk1 = _mm256_set1_epi64x(k1);
      for (int u = 0; u < kAvx2Chains; ++u) {
        const __m256i p0 = _mm256_mul_epu32(c0[u], m0);
        const __m256i p1 = _mm256_mul_epu32(c2[u], m1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p1, 32), c1[u]), kk0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(_mm256_srli_epi64(p0, 32), c3[u]), kk1);
        c1[u] = p1;
        c3[u] = p0;
        c0[u] = n0;
        c2[u] = n2;
      }
    }
    for (int u = 0; u < kAvx2Chains; ++u) {
      const __m256i w0 = _mm256_or_si256(_mm256_slli_epi64(c1[u], 32), _mm256_and_si256(c0[u], low));
      const __m256i w1 = _mm256_or_si256(_mm256_slli_epi64(c3[u], 32), _mm256_and_si256(c2[u], low));
      alignas(32) std::uint64_t a[4];
      alignas(32) std::uint64_t b[4];
      _mm256_store_si256(reinterpret_cast<__m256i*>(a), _mm256_srli_epi64(w0, 11));
      _mm256_store_si256(reinterpret_cast<__m256i*>(b), _mm256_srli_epi64(w1, 11));
      for (int i = 0; i < 4; ++i) {
        move[done + 4 * u + i] = static_cast<double>(a[i]) * 0x1.0p-53;
        xi[done + 4 * u + i] = static_cast<double>(b[i]) * 0x1.0p-53;
      }
    }
  }
  fill_scalar(rng, stream, first + done, count - done, move + done, xi + done);
}

using FillFn = void (*)(const CounterRng&, std::uint64_t, std::uint64_t, std::size_t, double*,
                        double*);

FillFn select_fill() {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq")) return fill_avx512;
  if (__builtin_cpu_supports("avx2")) return fill_avx2;
  return fill_scalar;
}

#endif  // SERW_X86_DISPATCH

}  // namespace

void fill_uniforms(const CounterRng& rng, std::uint64_t stream, std::uint64_t first,
                   std::size_t count, double* move, double* xi) {
#ifdef SERW_X86_DISPATCH
  static const FillFn fill = select_fill();
  fill(rng, stream, first, count, move, xi);
#else
  fill_scalar(rng, stream, first, count, move, xi);
#endif
}

void fill_uniforms_portable(const CounterRng& rng, std::uint64_t stream, std::uint64_t first,
                            std::size_t count, double* move, double* xi) {
  fill_scalar(rng, stream, first, count, move, xi);
}

}  // namespace serw
