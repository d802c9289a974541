#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Inner-loop arithmetic used by the aggregators. Every kernel has a portable
// scalar reference; vector variants (AVX2+FMA on x86-64, NEON on AArch64) are
// selected once at runtime. Vector variants may reassociate sums, so results
// agree with the reference to rounding, not bit-for-bit.
namespace crowdagg::kernels {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // number of i with a[i] == b[i]
  std::size_t (*count_equal)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);

  // number of nonzero bytes (inputs are 0/1 judgments)
  std::size_t (*count_ones)(const std::uint8_t* a, std::size_t n);
};

const KernelTable& scalar() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2() noexcept;
const KernelTable* neon() noexcept;

// Widest supported variant, unless the environment variable
// CROWDAGG_KERNELS=scalar forces the reference path.
const KernelTable& active() noexcept;

}  // namespace crowdagg::kernels
