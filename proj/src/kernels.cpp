#include "nhc/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace nhc::kernels {

#ifdef NHC_HAVE_AVX2
bool avx2_compiled() { return true; }
bool avx2_supported() { return __builtin_cpu_supports("avx2"); }
#else
bool avx2_compiled() { return false; }
bool avx2_supported() { return false; }
const Kernels& avx2() {
  throw std::runtime_error("AVX2 kernels were not compiled into this binary");
}
#endif

const Kernels& active() {
  static const Kernels& chosen = []() -> const Kernels& {
    const char* env = std::getenv("NHC_KERNELS");
    const std::string_view want = env ? env : "";
    if (want == "scalar") return scalar();
    if (want == "avx2") {
      if (!avx2_supported())
        throw std::runtime_error("NHC_KERNELS=avx2 requested but AVX2 is unavailable");
      return avx2();
    }
    if (!want.empty())
      throw std::runtime_error("unknown NHC_KERNELS value; expected scalar or avx2");
    return avx2_supported() ? avx2() : scalar();
  }();
  return chosen;
}

}  // namespace nhc::kernels
