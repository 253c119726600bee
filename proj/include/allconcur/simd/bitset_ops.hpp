#pragma once

// Word-parallel bitset kernels used by the reachability sweeps (diameter,
// fault diameter). A scalar reference implementation is always available;
// vector variants are compiled per-ISA and picked at runtime.
//
// Set ALLCONCUR_SIMD=scalar|avx2|neon to force a variant.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace allconcur::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view name(Isa isa);

struct BitsetOps {
  Isa isa;
  /// dst |= src
  void (*or_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
  /// dst &= src
  void (*and_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
  bool (*equal)(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
  std::size_t (*popcount)(const std::uint64_t* src, std::size_t words);
};

/// Variant for `isa`, or nullptr when it was not compiled in or the CPU
/// lacks the instructions.
const BitsetOps* ops_for(Isa isa);

/// All variants usable on this machine; Scalar first.
std::vector<Isa> available_isas();

/// Active variant: ALLCONCUR_SIMD if set and usable, else the widest one.
const BitsetOps& ops();

namespace detail {
extern const BitsetOps kScalarOps;
#if defined(ALLCONCUR_HAVE_AVX2)
extern const BitsetOps kAvx2Ops;
#endif
#if defined(ALLCONCUR_HAVE_NEON)
extern const BitsetOps kNeonOps;
#endif
}  // namespace detail

}  // namespace allconcur::simd
