#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, where
// the CPU supports it, an AVX2 variant. The active table is chosen once at
// first use: AVX2 when available, unless PEERGROUPS_SIMD=scalar is set.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace peergroups::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  /// popcount(a & b) over equal-length word spans.
  std::uint64_t (*and_popcount)(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
  /// Exact integer dot product, sum of a[k] * b[k].
  std::int64_t (*dot_i32)(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
  /// One Bernoulli(p) convolution step of a truncated count distribution:
  /// out[0] = in[0](1-p), out[k] = in[k](1-p) + in[k-1]p for 0 < k < in.size().
  void (*bernoulli_step)(std::span<const double> in, std::span<double> out, double p);
  /// Sum of y[k] / (1 + x y[k]); the bipartite configuration model's
  /// fixed-point denominator.
  double (*ratio_sum)(double x, std::span<const double> y);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_table() noexcept;

const KernelTable& active() noexcept;
/// Overrides the runtime choice (tests and benchmarks). Falls back to scalar
/// when the requested ISA is unavailable; returns the ISA actually selected.
Isa select(Isa isa) noexcept;

}  // namespace peergroups::kernels
