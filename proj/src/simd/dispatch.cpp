#include <atomic>
#include <cstdlib>
#include <string>

#include "kolmo/error.hpp"
#include "kolmo/simd.hpp"

namespace kolmo::simd {
namespace {

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable& pick_default() {
  if (const char* env = std::getenv("KOLMO_SIMD")) {
    const std::string v(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (v == name(b)) return table(b);
    }
    throw InvalidArgument("KOLMO_SIMD: unknown backend '" + v + "'");
  }
  const auto all = supported_backends();
  return table(all.back());
}

}  // namespace

std::string_view name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "unknown";
}

bool supported(Backend b) {
  switch (b) {
    case Backend::scalar: return true;
    case Backend::avx2:
#if defined(KOLMO_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(KOLMO_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> supported_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
    if (supported(b)) out.push_back(b);
  }
  return out;
}

const KernelTable& table(Backend b) {
  if (!supported(b)) {
    throw InvalidArgument("SIMD backend '" + std::string(name(b)) + "' not supported on this CPU");
  }
  switch (b) {
#if defined(KOLMO_HAVE_AVX2)
    case Backend::avx2: return avx2_table();
#endif
#if defined(KOLMO_HAVE_NEON)
    case Backend::neon: return neon_table();
#endif
    default: return scalar_table();
  }
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    const KernelTable* chosen = &pick_default();
    const KernelTable* expected = nullptr;
    g_active.compare_exchange_strong(expected, chosen, std::memory_order_acq_rel);
    t = g_active.load(std::memory_order_acquire);
  }
  return *t;
}

void select(Backend b) { g_active.store(&table(b), std::memory_order_release); }

}  // namespace kolmo::simd
