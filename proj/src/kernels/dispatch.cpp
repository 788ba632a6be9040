#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "amnet/kernels.hpp"

namespace amnet::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(AMNET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("AMNET_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return detected_isa();
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

Isa detected_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && !cpu_has_avx2()) {
    throw std::runtime_error("avx2 kernels are not available on this CPU/build");
  }
  active().store(isa, std::memory_order_relaxed);
}

template <typename T>
const Table<T>& table(Isa isa) {
#if defined(AMNET_HAVE_AVX2)
  if (isa == Isa::avx2) return avx2_table<T>();
#endif
  (void)isa;
  return scalar_table<T>();
}

template const Table<float>& table<float>(Isa);
template const Table<double>& table<double>(Isa);

}  // namespace amnet::kernels
