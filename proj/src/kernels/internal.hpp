#pragma once

#include "peergroups/kernels.hpp"

namespace peergroups::kernels::detail {

std::uint64_t and_popcount_scalar(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
std::int64_t dot_i32_scalar(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
void bernoulli_step_scalar(std::span<const double> in, std::span<double> out, double p);
double ratio_sum_scalar(double x, std::span<const double> y);

#if defined(__x86_64__) || defined(__i386__)
#define PEERGROUPS_HAVE_AVX2_KERNELS 1
std::uint64_t and_popcount_avx2(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
std::int64_t dot_i32_avx2(std::span<const std::int32_t> a, std::span<const std::int32_t> b);
void bernoulli_step_avx2(std::span<const double> in, std::span<double> out, double p);
double ratio_sum_avx2(double x, std::span<const double> y);
#else
#define PEERGROUPS_HAVE_AVX2_KERNELS 0
#endif

}  // namespace peergroups::kernels::detail
