#include "finegrid/simd/kernels.hpp"

namespace finegrid::simd::scalar {

std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& r) {
  const float neg_half = -r.half_width;
  std::size_t n = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const float dx = xs[i] - r.ox;
    const float dy = ys[i] - r.oy;
    const float along = dx * r.ux + dy * r.uy;
    const float across = dy * r.ux - dx * r.uy;
    n += (along >= 0.f) & (along < r.length) & (across >= neg_half) & (across < r.half_width);
  }
  return n;
}

bool span_free_or_owned(std::span<const int32_t> owners, int32_t self) {
  for (int32_t o : owners) {
    if (o != 0 && o != self) return false;
  }
  return true;
}

}  // namespace finegrid::simd::scalar
