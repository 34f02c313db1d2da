#include <atomic>

#include "finegrid/simd/kernels.hpp"

namespace finegrid::simd {

namespace {

using CountFn = std::size_t (*)(std::span<const float>, std::span<const float>, const OrientedRectF&);
using SpanFn = bool (*)(std::span<const int32_t>, int32_t);

struct Table {
  Isa isa;
  CountFn count;
  SpanFn span;
};

Table table_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(__i386__)
    case Isa::Avx2: return {Isa::Avx2, &avx2::count_in_oriented_rect, &avx2::span_free_or_owned};
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
    case Isa::Neon: return {Isa::Neon, &neon::count_in_oriented_rect, &neon::span_free_or_owned};
#endif
    default: return {Isa::Scalar, &scalar::count_in_oriented_rect, &scalar::span_free_or_owned};
  }
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__) || defined(__ARM_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  if (isa_supported(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) {
  const Isa chosen = isa_supported(isa) ? isa : Isa::Scalar;
  current().store(chosen, std::memory_order_relaxed);
  return chosen;
}

std::size_t count_in_oriented_rect(std::span<const float> xs, std::span<const float> ys,
                                   const OrientedRectF& rect) {
  return table_for(active_isa()).count(xs, ys, rect);
}

bool span_free_or_owned(std::span<const int32_t> owners, int32_t self) {
  return table_for(active_isa()).span(owners, self);
}

}  // namespace finegrid::simd
