#include <cstdlib>
#include <string_view>

#include "crowdagg/kernels.hpp"

namespace crowdagg::kernels {

#if defined(CROWDAGG_BUILD_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(CROWDAGG_BUILD_NEON)
extern const KernelTable kNeonTable;
#endif

const KernelTable* avx2() noexcept {
#if defined(CROWDAGG_BUILD_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon() noexcept {
#if defined(CROWDAGG_BUILD_NEON)
  return &kNeonTable;  // mandatory on AArch64
#else
  return nullptr;
#endif
}

const KernelTable& active() noexcept {
  static const KernelTable* selected = [] {
    if (const char* env = std::getenv("CROWDAGG_KERNELS"); env != nullptr && std::string_view(env) == "scalar") {
      return &scalar();
    }
    if (const auto* t = avx2()) return t;
    if (const auto* t = neon()) return t;
    return &scalar();
  }();
  return *selected;
}

}  // namespace crowdagg::kernels
