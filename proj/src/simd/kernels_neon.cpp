#include "finegrid/simd/kernels.hpp"

#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

namespace finegrid::simd::neon {

std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& r) {
  const std::size_t n = xs.size();
  const float32x4_t ox = vdupq_n_f32(r.ox);
  const float32x4_t oy = vdupq_n_f32(r.oy);
  const float32x4_t ux = vdupq_n_f32(r.ux);
  const float32x4_t uy = vdupq_n_f32(r.uy);
  const float32x4_t len = vdupq_n_f32(r.length);
  const float32x4_t hw = vdupq_n_f32(r.half_width);
  const float32x4_t neg_hw = vdupq_n_f32(-r.half_width);
  const float32x4_t zero = vdupq_n_f32(0.f);

  uint32x4_t acc = vdupq_n_u32(0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t dx = vsubq_f32(vld1q_f32(xs.data() + i), ox);
    const float32x4_t dy = vsubq_f32(vld1q_f32(ys.data() + i), oy);
    // separate mul/add: vmlaq may fuse on some targets
    const float32x4_t along = vaddq_f32(vmulq_f32(dx, ux), vmulq_f32(dy, uy));
    const float32x4_t across = vsubq_f32(vmulq_f32(dy, ux), vmulq_f32(dx, uy));
    uint32x4_t m = vcgeq_f32(along, zero);
    m = vandq_u32(m, vcltq_f32(along, len));
    m = vandq_u32(m, vcgeq_f32(across, neg_hw));
    m = vandq_u32(m, vcltq_f32(across, hw));
    acc = vaddq_u32(acc, vshrq_n_u32(m, 31));
  }
  std::size_t count = vgetq_lane_u32(acc, 0) + vgetq_lane_u32(acc, 1) + vgetq_lane_u32(acc, 2) +
                      vgetq_lane_u32(acc, 3);
  if (i < n) count += scalar::count_in_oriented_rect(xs.subspan(i), ys.subspan(i), r);
  return count;
}

bool span_free_or_owned(std::span<const int32_t> owners, int32_t self) {
  const std::size_t n = owners.size();
  const int32x4_t zero = vdupq_n_s32(0);
  const int32x4_t me = vdupq_n_s32(self);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int32x4_t v = vld1q_s32(owners.data() + i);
    const uint32x4_t ok = vorrq_u32(vceqq_s32(v, zero), vceqq_s32(v, me));
    const uint32x2_t folded = vand_u32(vget_low_u32(ok), vget_high_u32(ok));
    if ((vget_lane_u32(folded, 0) & vget_lane_u32(folded, 1)) != 0xFFFFFFFFu) return false;
  }
  return scalar::span_free_or_owned(owners.subspan(i), self);
}

}  // namespace finegrid::simd::neon

#endif
