#include <cstdlib>
#include <string>

#include "allconcur/simd/bitset_ops.hpp"

namespace allconcur::simd {

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const BitsetOps* ops_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &detail::kScalarOps;
    case Isa::Avx2:
#if defined(ALLCONCUR_HAVE_AVX2)
      if (__builtin_cpu_supports("avx2")) return &detail::kAvx2Ops;
#endif
      return nullptr;
    case Isa::Neon:
#if defined(ALLCONCUR_HAVE_NEON)
      return &detail::kNeonOps;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::vector<Isa> available_isas() {
  std::vector<Isa> result;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (ops_for(isa) != nullptr) result.push_back(isa);
  }
  return result;
}

namespace {

const BitsetOps& select() {
  if (const char* forced = std::getenv("ALLCONCUR_SIMD")) {
    const std::string want(forced);
    for (Isa isa : available_isas()) {
      if (name(isa) == want) return *ops_for(isa);
    }
  }
  const auto isas = available_isas();
  return *ops_for(isas.back());
}

}  // namespace

const BitsetOps& ops() {
  static const BitsetOps& active = select();
  return active;
}

}  // namespace allconcur::simd
