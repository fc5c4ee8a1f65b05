#include <bit>

#include "internal.hpp"

namespace peergroups::kernels::detail {

std::uint64_t and_popcount_scalar(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < a.size(); ++k) total += static_cast<std::uint64_t>(std::popcount(a[k] & b[k]));
  return total;
}

std::int64_t dot_i32_scalar(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  std::int64_t total = 0;
  for (std::size_t k = 0; k < a.size(); ++k) total += std::int64_t{a[k]} * b[k];
  return total;
}

void bernoulli_step_scalar(std::span<const double> in, std::span<double> out, double p) {
  if (in.empty()) return;
  const double q = 1.0 - p;
  out[0] = in[0] * q;
  for (std::size_t k = 1; k < in.size(); ++k) out[k] = in[k] * q + in[k - 1] * p;
}

double ratio_sum_scalar(double x, std::span<const double> y) {
  double total = 0.0;
  for (double v : y) total += v / (1.0 + x * v);
  return total;
}

}  // namespace peergroups::kernels::detail
