#include <atomic>
#include <cstdlib>
#include <string_view>

#include "internal.hpp"

namespace peergroups::kernels {
namespace {

constexpr KernelTable kScalar{Isa::kScalar, detail::and_popcount_scalar, detail::dot_i32_scalar,
                              detail::bernoulli_step_scalar, detail::ratio_sum_scalar};

#if PEERGROUPS_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Isa::kAvx2, detail::and_popcount_avx2, detail::dot_i32_avx2,
                            detail::bernoulli_step_avx2, detail::ratio_sum_avx2};
#endif

const KernelTable* initial_choice() noexcept {
  if (const char* env = std::getenv("PEERGROUPS_SIMD")) {
    if (std::string_view(env) == "scalar") return &kScalar;
  }
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_choice()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if PEERGROUPS_HAVE_AVX2_KERNELS
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt")) return &kAvx2;
#endif
  return nullptr;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

Isa select(Isa isa) noexcept {
  const KernelTable* t = &kScalar;
  if (isa == Isa::kAvx2) {
    if (const KernelTable* a = avx2_table()) t = a;
  }
  current().store(t, std::memory_order_release);
  return t->isa;
}

}  // namespace peergroups::kernels
