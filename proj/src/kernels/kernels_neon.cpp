#include <arm_neon.h>

#include "crowdagg/kernels.hpp"

namespace crowdagg::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

std::size_t count_equal_neon(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t eq = vceqq_u8(vld1q_u8(a + i), vld1q_u8(b + i));
    count += vaddvq_u8(vshrq_n_u8(eq, 7));
  }
  for (; i < n; ++i) count += (a[i] == b[i]) ? 1 : 0;
  return count;
}

std::size_t count_ones_neon(const std::uint8_t* a, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t nz = vtstq_u8(vld1q_u8(a + i), vld1q_u8(a + i));
    count += vaddvq_u8(vshrq_n_u8(nz, 7));
  }
  for (; i < n; ++i) count += (a[i] != 0) ? 1 : 0;
  return count;
}

}  // namespace

extern const KernelTable kNeonTable;
const KernelTable kNeonTable{"neon", dot_neon, axpy_neon, count_equal_neon, count_ones_neon};

}  // namespace crowdagg::kernels
