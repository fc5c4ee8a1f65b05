#include "internal.hpp"

#if PEERGROUPS_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <bit>

// Compiled without -mavx2: each function opts in through the target
// attribute so that no AVX2 code leaks into inline functions shared with
// other translation units.
#define PEERGROUPS_AVX2 __attribute__((target("avx2,popcnt")))

namespace peergroups::kernels::detail {
namespace {

// Nibble lookup popcount (Mula), one byte count per lane.
PEERGROUPS_AVX2 inline __m256i popcount_bytes(__m256i v) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low_mask);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
  return _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
}

PEERGROUPS_AVX2 inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

PEERGROUPS_AVX2 std::uint64_t and_popcount_avx2(std::span<const std::uint64_t> a,
                                                std::span<const std::uint64_t> b) {
  const std::size_t n = a.size();
  std::size_t k = 0;
  __m256i acc = _mm256_setzero_si256();
  for (; k + 4 <= n; k += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + k));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + k));
    const __m256i counts = popcount_bytes(_mm256_and_si256(va, vb));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(counts, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; k < n; ++k) total += static_cast<std::uint64_t>(__builtin_popcountll(a[k] & b[k]));
  return total;
}

// Widens four int32 lanes to int64 before multiplying; exact like the scalar path.
PEERGROUPS_AVX2 std::int64_t dot_i32_avx2(std::span<const std::int32_t> a,
                                          std::span<const std::int32_t> b) {
  const std::size_t n = a.size();
  std::size_t k = 0;
  __m256i acc = _mm256_setzero_si256();
  for (; k + 4 <= n; k += 4) {
    const __m256i va = _mm256_cvtepi32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(a.data() + k)));
    const __m256i vb = _mm256_cvtepi32_epi64(_mm_loadu_si128(reinterpret_cast<const __m128i*>(b.data() + k)));
    acc = _mm256_add_epi64(acc, _mm256_mul_epi32(va, vb));
  }
  alignas(32) std::int64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::int64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; k < n; ++k) total += std::int64_t{a[k]} * b[k];
  return total;
}

// Same operation order as the scalar step (no fused multiply-add), so the
// two variants agree bit for bit.
PEERGROUPS_AVX2 void bernoulli_step_avx2(std::span<const double> in, std::span<double> out, double p) {
  const std::size_t n = in.size();
  if (n == 0) return;
  const double q = 1.0 - p;
  out[0] = in[0] * q;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vp = _mm256_set1_pd(p);
  std::size_t k = 1;
  for (; k + 4 <= n; k += 4) {
    const __m256d cur = _mm256_loadu_pd(in.data() + k);
    const __m256d prev = _mm256_loadu_pd(in.data() + k - 1);
    _mm256_storeu_pd(out.data() + k, _mm256_add_pd(_mm256_mul_pd(cur, vq), _mm256_mul_pd(prev, vp)));
  }
  for (; k < n; ++k) out[k] = in[k] * q + in[k - 1] * p;
}

PEERGROUPS_AVX2 double ratio_sum_avx2(double x, std::span<const double> y) {
  const std::size_t n = y.size();
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + k);
    acc = _mm256_add_pd(acc, _mm256_div_pd(vy, _mm256_add_pd(one, _mm256_mul_pd(vx, vy))));
  }
  double total = horizontal_sum(acc);
  for (; k < n; ++k) total += y[k] / (1.0 + x * y[k]);
  return total;
}

}  // namespace peergroups::kernels::detail

#endif
