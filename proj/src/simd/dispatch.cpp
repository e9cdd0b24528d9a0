#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hazode/simd/kernels.hpp"

namespace hazode::simd {

namespace detail {
#if !defined(HAZODE_HAVE_AVX2)
const KernelTable* avx2_table() { return nullptr; }
#endif
}  // namespace detail

namespace {

Isa detect() {
  if (const char* forced = std::getenv("HAZODE_ISA")) {
    const std::string v(forced);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  static const bool cpu = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return cpu && detail::avx2_table() != nullptr;
#else
  return false;
#endif
}

const KernelTable& kernels(Isa isa) {
  if (!isa_supported(isa)) throw std::runtime_error("instruction set not supported: " + std::string(to_string(isa)));
  return isa == Isa::Avx2 ? *detail::avx2_table() : detail::scalar_table();
}

const KernelTable& active_kernels() { return kernels(active().load(std::memory_order_relaxed)); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  kernels(isa);
  active().store(isa, std::memory_order_relaxed);
}

}  // namespace hazode::simd
