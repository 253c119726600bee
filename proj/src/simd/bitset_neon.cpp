// Built on aarch64 only (NEON is part of the base ISA there).

#include <arm_neon.h>

#include "allconcur/simd/bitset_ops.hpp"

namespace allconcur::simd {

namespace {

constexpr std::size_t kLane = 2;  // 64-bit words per uint64x2_t

void or_into_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  std::size_t i = 0;
  for (; i + kLane <= words; i += kLane) vst1q_u64(dst + i, vorrq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
  for (; i < words; ++i) dst[i] |= src[i];
}

void and_into_neon(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  std::size_t i = 0;
  for (; i + kLane <= words; i += kLane) vst1q_u64(dst + i, vandq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
  for (; i < words; ++i) dst[i] &= src[i];
}

bool equal_neon(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  std::size_t i = 0;
  for (; i + kLane <= words; i += kLane) {
    const uint64x2_t diff = veorq_u64(vld1q_u64(a + i), vld1q_u64(b + i));
    if ((vgetq_lane_u64(diff, 0) | vgetq_lane_u64(diff, 1)) != 0) return false;
  }
  for (; i < words; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

std::size_t popcount_neon(const std::uint64_t* src, std::size_t words) {
  std::size_t total = 0;
  std::size_t i = 0;
  for (; i + kLane <= words; i += kLane) {
    const uint8x16_t counts = vcntq_u8(vreinterpretq_u8_u64(vld1q_u64(src + i)));
    total += vaddvq_u8(counts);
  }
  for (; i < words; ++i) total += static_cast<std::size_t>(__builtin_popcountll(src[i]));
  return total;
}

}  // namespace

namespace detail {
const BitsetOps kNeonOps{Isa::Neon, or_into_neon, and_into_neon, equal_neon, popcount_neon};
}

}  // namespace allconcur::simd
