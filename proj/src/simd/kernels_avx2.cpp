#include "finegrid/simd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#define FINEGRID_AVX2 __attribute__((target("avx2,popcnt")))

namespace finegrid::simd::avx2 {

FINEGRID_AVX2 std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                                 const OrientedRectF& r) {
  const std::size_t n = xs.size();
  const __m256 ox = _mm256_set1_ps(r.ox);
  const __m256 oy = _mm256_set1_ps(r.oy);
  const __m256 ux = _mm256_set1_ps(r.ux);
  const __m256 uy = _mm256_set1_ps(r.uy);
  const __m256 len = _mm256_set1_ps(r.length);
  const __m256 hw = _mm256_set1_ps(r.half_width);
  const __m256 neg_hw = _mm256_set1_ps(-r.half_width);
  const __m256 zero = _mm256_setzero_ps();

  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 dx = _mm256_sub_ps(_mm256_loadu_ps(xs.data() + i), ox);
    const __m256 dy = _mm256_sub_ps(_mm256_loadu_ps(ys.data() + i), oy);
    const __m256 along = _mm256_add_ps(_mm256_mul_ps(dx, ux), _mm256_mul_ps(dy, uy));
    const __m256 across = _mm256_sub_ps(_mm256_mul_ps(dy, ux), _mm256_mul_ps(dx, uy));
    __m256 m = _mm256_cmp_ps(along, zero, _CMP_GE_OQ);
    m = _mm256_and_ps(m, _mm256_cmp_ps(along, len, _CMP_LT_OQ));
    m = _mm256_and_ps(m, _mm256_cmp_ps(across, neg_hw, _CMP_GE_OQ));
    m = _mm256_and_ps(m, _mm256_cmp_ps(across, hw, _CMP_LT_OQ));
    count += static_cast<std::size_t>(_mm_popcnt_u32(static_cast<unsigned>(_mm256_movemask_ps(m))));
  }
  if (i < n) count += scalar::count_in_oriented_rect(xs.subspan(i), ys.subspan(i), r);
  return count;
}

FINEGRID_AVX2 bool span_free_or_owned(std::span<const int32_t> owners, int32_t self) {
  const std::size_t n = owners.size();
  const __m256i zero = _mm256_setzero_si256();
  const __m256i me = _mm256_set1_epi32(self);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(owners.data() + i));
    const __m256i ok = _mm256_or_si256(_mm256_cmpeq_epi32(v, zero), _mm256_cmpeq_epi32(v, me));
    if (_mm256_movemask_epi8(ok) != -1) return false;
  }
  return scalar::span_free_or_owned(owners.subspan(i), self);
}

}  // namespace finegrid::simd::avx2

#endif
