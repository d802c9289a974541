#include "crowdagg/kernels.hpp"

namespace crowdagg::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

std::size_t count_equal_scalar(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] == b[i]) ? 1 : 0;
  return count;
}

std::size_t count_ones_scalar(const std::uint8_t* a, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] != 0) ? 1 : 0;
  return count;
}

constexpr KernelTable kScalar{"scalar", dot_scalar, axpy_scalar, count_equal_scalar, count_ones_scalar};

}  // namespace

const KernelTable& scalar() noexcept { return kScalar; }

}  // namespace crowdagg::kernels
