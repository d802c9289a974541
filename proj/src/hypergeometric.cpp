#include "crowdagg/hypergeometric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "crowdagg/error.hpp"

namespace crowdagg {

namespace {

constexpr std::uint64_t kExactLimit = std::uint64_t(1) << 53;

// C(n, k) if it is below 2^53, otherwise nullopt.
std::optional<std::uint64_t> exact_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // c * m is divisible by i (it equals i * C(n-k+i, i)); split the division
    // so the product stays in range.
    const std::uint64_t m = n - k + i;
    const std::uint64_t g = std::gcd(c, i);
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(c / g, m / (i / g), &next) || next >= kExactLimit) return std::nullopt;
    c = next;
  }
  return c;
}

}  // namespace

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

double hypergeometric_tail(std::uint64_t population, std::uint64_t marked, std::uint64_t drawn,
                           std::uint64_t threshold) {
  if (marked > population || drawn > population) {
    throw DomainError("hypergeometric_tail: marked (" + std::to_string(marked) + ") and drawn (" +
                      std::to_string(drawn) + ") must not exceed population (" + std::to_string(population) + ")");
  }
  const std::uint64_t lo = (drawn + marked > population) ? drawn + marked - population : 0;
  const std::uint64_t hi = std::min(marked, drawn);
  if (threshold <= lo) return 1.0;
  if (threshold > hi) return 0.0;

  // Exact path: numerator and denominator are counts of drawn subsets.
  if (const auto total = exact_binomial(population, drawn)) {
    std::uint64_t favourable = 0;
    bool exact = true;
    for (std::uint64_t k = threshold; k <= hi && exact; ++k) {
      const auto a = exact_binomial(marked, k);
      const auto b = exact_binomial(population - marked, drawn - k);
      if (!a || !b) {
        exact = false;
        break;
      }
      favourable += *a * *b;  // each term counts subsets, so it is <= total < 2^53
    }
    if (exact) return double(favourable) / double(*total);
  }

  // Log-space path: sum the smaller side of the distribution for accuracy.
  const double log_total = log_binomial(population, drawn);
  const auto log_pmf = [&](std::uint64_t k) {
    return log_binomial(marked, k) + log_binomial(population - marked, drawn - k) - log_total;
  };
  const bool upper_is_short = (hi - threshold) <= (threshold - lo);
  std::vector<double> terms;
  if (upper_is_short) {
    for (std::uint64_t k = threshold; k <= hi; ++k) terms.push_back(log_pmf(k));
  } else {
    for (std::uint64_t k = lo; k < threshold; ++k) terms.push_back(log_pmf(k));
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (const auto t : terms) sum += std::exp(t - peak);
  const double side = std::exp(peak + std::log(sum));
  const double tail = upper_is_short ? side : 1.0 - side;
  return std::clamp(tail, 0.0, 1.0);
}

}  // namespace crowdagg

namespace crowdagg {

double hypergeometric_pmf(std::uint64_t population, std::uint64_t marked, std::uint64_t drawn, std::uint64_t k) {
  if (marked > population || drawn > population) throw DomainError("hypergeometric_pmf: parameters exceed population");
  if (k > marked || k > drawn || drawn - k > population - marked) return 0.0;
  const auto total = exact_binomial(population, drawn);
  const auto a = exact_binomial(marked, k);
  const auto b = exact_binomial(population - marked, drawn - k);
  if (total && a && b) {
    return double(*a * *b) / double(*total);
  }
  return std::exp(log_binomial(marked, k) + log_binomial(population - marked, drawn - k) -
                  log_binomial(population, drawn));
}

}  // namespace crowdagg
