#pragma once

// Data-parallel inner loops of the simulator. Every kernel has a scalar reference
// implementation; vector variants must return bit-identical results (they perform
// the same IEEE operations in the same order, with no FMA contraction).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace finegrid::simd {

/// Oriented rectangle in single precision: origin, unit heading, length and half width.
struct OrientedRectF {
  float ox = 0.f;
  float oy = 0.f;
  float ux = 1.f;
  float uy = 0.f;
  float length = 0.f;
  float half_width = 0.f;
};

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// Best instruction set usable on this machine.
Isa detected_isa();

/// Instruction set currently used by the dispatching entry points.
Isa active_isa();

/// Force an instruction set (tests, benchmarks). Falls back to Scalar if unsupported.
/// Returns the isa actually selected.
Isa set_active_isa(Isa isa);

bool isa_supported(Isa isa);

/// Number of points (xs[i], ys[i]) with along in [0, length) and across in
/// [-half_width, half_width). xs and ys must have equal size.
std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& rect);

/// True iff every owner id is 0 (free) or equal to `self`.
bool span_free_or_owned(std::span<const int32_t> owners, int32_t self);

namespace scalar {
std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& rect);
bool span_free_or_owned(std::span<const int32_t> owners, int32_t self);
}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& rect);
bool span_free_or_owned(std::span<const int32_t> owners, int32_t self);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(__ARM_NEON)
namespace neon {
std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& rect);
bool span_free_or_owned(std::span<const int32_t> owners, int32_t self);
}  // namespace neon
#endif

}  // namespace finegrid::simd
