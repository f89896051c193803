#include <atomic>
#include <cstdlib>
#include <string_view>

#include "levybsde/kernels.hpp"

namespace levybsde::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(LEVYBSDE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("LEVYBSDE_KERNELS"); env && std::string_view(env) == "scalar")
    return Backend::Scalar;
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

bool backend_available(Backend backend) {
  return backend == Backend::Scalar || cpu_has_avx2();
}

bool set_backend(Backend backend) {
  if (!backend_available(backend)) return false;
  current().store(backend);
  return true;
}

Backend active_backend() { return current().load(); }

std::string_view backend_name(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

const KernelTable& active() {
#if defined(LEVYBSDE_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Backend::Avx2) return avx2_table();
#endif
  return scalar_table();
}

}  // namespace levybsde::kernels
