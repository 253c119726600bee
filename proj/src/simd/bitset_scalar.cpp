#include <bit>

#include "allconcur/simd/bitset_ops.hpp"

namespace allconcur::simd {

namespace {

void or_into_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) dst[i] |= src[i];
}

void and_into_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) dst[i] &= src[i];
}

bool equal_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

std::size_t popcount_scalar(const std::uint64_t* src, std::size_t words) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < words; ++i) total += static_cast<std::size_t>(std::popcount(src[i]));
  return total;
}

}  // namespace

namespace detail {
const BitsetOps kScalarOps{Isa::Scalar, or_into_scalar, and_into_scalar, equal_scalar, popcount_scalar};
}

}  // namespace allconcur::simd
