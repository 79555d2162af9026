#include <immintrin.h>

#include "mkedge/simd/kernels.hpp"

namespace mkedge::simd::detail {

namespace {

inline __m256i rotl(__m256i x, int k) {
  return _mm256_or_si256(_mm256_slli_epi32(x, k), _mm256_srli_epi32(x, 32 - k));
}

}  // namespace

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d y0 = _mm256_add_pd(_mm256_loadu_pd(y + k), _mm256_mul_pd(av, _mm256_loadu_pd(x + k)));
    const __m256d y1 =
        _mm256_add_pd(_mm256_loadu_pd(y + k + 4), _mm256_mul_pd(av, _mm256_loadu_pd(x + k + 4)));
    _mm256_storeu_pd(y + k, y0);
    _mm256_storeu_pd(y + k + 4, y1);
  }
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), _mm256_mul_pd(av, _mm256_loadu_pd(x + k))));
  }
  for (; k < n; ++k) y[k] += a * x[k];
}

void run_paths_avx2(const PathTables& tables, const PathBlock& block) {
  constexpr std::size_t kLanes = 8;
  const int bits = tables.table_bits;
  const int shift = 32 - bits;
  const __m128i shift_count = _mm_cvtsi32_si128(shift);
  const __m128i bits_count = _mm_cvtsi32_si128(bits);
  const __m256i frac_mask = _mm256_set1_epi32(static_cast<int>((std::uint32_t{1} << shift) - 1));
  const auto* thr = reinterpret_cast<const int*>(tables.threshold.data());
  const int* alias = tables.alias.data();
  const double* f = tables.f.data();
  const int last = block.horizons.empty() ? 0 : block.horizons.back();
  const std::size_t stride = block.out_stride();

  const std::size_t full = block.count - block.count % kLanes;
  alignas(32) std::uint32_t seeds[4][kLanes];
  alignas(32) double sums_out[kLanes];
  alignas(32) std::int32_t states_out[kLanes];

  for (std::size_t base = 0; base < full; base += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      const auto st = seed_stream(block.seed, block.start, block.first_path + base + l);
      for (int w = 0; w < 4; ++w) seeds[w][l] = st[static_cast<std::size_t>(w)];
    }
    __m256i s0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(seeds[0]));
    __m256i s1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(seeds[1]));
    __m256i s2 = _mm256_load_si256(reinterpret_cast<const __m256i*>(seeds[2]));
    __m256i s3 = _mm256_load_si256(reinterpret_cast<const __m256i*>(seeds[3]));
    __m256i cur = _mm256_set1_epi32(block.start);
    __m256d sum_lo = _mm256_setzero_pd();
    __m256d sum_hi = _mm256_setzero_pd();
    std::size_t next_h = 0;

    for (int t = 1; t <= last; ++t) {
      // xoshiro128++ on eight lanes
      const __m256i x = _mm256_add_epi32(rotl(_mm256_add_epi32(s0, s3), 7), s0);
      const __m256i tmp = _mm256_slli_epi32(s1, 9);
      s2 = _mm256_xor_si256(s2, s0);
      s3 = _mm256_xor_si256(s3, s1);
      s1 = _mm256_xor_si256(s1, s2);
      s0 = _mm256_xor_si256(s0, s3);
      s2 = _mm256_xor_si256(s2, tmp);
      s3 = rotl(s3, 11);

      const __m256i col = _mm256_srl_epi32(x, shift_count);
      const __m256i frac = _mm256_and_si256(x, frac_mask);
      const __m256i idx = _mm256_add_epi32(_mm256_sll_epi32(cur, bits_count), col);
      const __m256i threshold = _mm256_i32gather_epi32(thr, idx, 4);
      const __m256i jump = _mm256_i32gather_epi32(alias, idx, 4);
      // Thresholds are <= 2^30, so the signed compare is exact.
      const __m256i accept = _mm256_cmpgt_epi32(threshold, frac);
      cur = _mm256_blendv_epi8(jump, col, accept);

      sum_lo = _mm256_add_pd(sum_lo, _mm256_i32gather_pd(f, _mm256_castsi256_si128(cur), 8));
      sum_hi = _mm256_add_pd(sum_hi, _mm256_i32gather_pd(f, _mm256_extracti128_si256(cur, 1), 8));

      if (t == block.horizons[next_h]) {
        _mm256_store_pd(sums_out, sum_lo);
        _mm256_store_pd(sums_out + 4, sum_hi);
        _mm256_store_si256(reinterpret_cast<__m256i*>(states_out), cur);
        for (std::size_t l = 0; l < kLanes; ++l) {
          block.sums[next_h * stride + base + l] = sums_out[l];
          block.states[next_h * stride + base + l] = states_out[l];
        }
        ++next_h;
      }
    }
  }

  if (full < block.count) {
    PathBlock tail = block;
    tail.first_path = block.first_path + full;
    tail.count = block.count - full;
    tail.sums = block.sums + full;
    tail.states = block.states + full;
    tail.stride = stride;
    run_paths_scalar(tables, tail);
  }
}

}  // namespace mkedge::simd::detail
