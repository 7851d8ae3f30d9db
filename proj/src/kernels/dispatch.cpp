#include "tarnn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace tarnn::kern {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend env_backend() {
  const char* e = std::getenv("TARNN_KERNELS");
  if (!e) return Backend::Auto;
  if (std::strcmp(e, "scalar") == 0) return Backend::Scalar;
  if (std::strcmp(e, "avx2") == 0) return Backend::Avx2;
  return Backend::Auto;
}

std::atomic<const Kernels*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::Auto};

const Kernels* resolve(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &scalar_kernels;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (!cpu_has_avx2())
        throw std::runtime_error("avx2 kernels requested but CPU lacks AVX2/FMA");
      return &avx2_kernels;
#else
      throw std::runtime_error("avx2 kernels unavailable on this architecture");
#endif
    case Backend::Auto:
    default:
#if defined(__x86_64__) || defined(_M_X64)
      if (cpu_has_avx2()) return &avx2_kernels;
#endif
      return &scalar_kernels;
  }
}

}  // namespace

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    const Backend b = env_backend();
    k = resolve(b);
    g_backend.store(b, std::memory_order_relaxed);
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void set_backend(Backend b) {
  g_active.store(resolve(b), std::memory_order_release);
  g_backend.store(b, std::memory_order_relaxed);
}

Backend backend() {
  active();
  return g_backend.load(std::memory_order_relaxed);
}

std::string backend_name() { return active().name; }

bool avx2_available() { return cpu_has_avx2(); }

}  // namespace tarnn::kern
