#pragma once

#include <cstdint>

namespace crowdagg {

// P(X >= threshold) for X ~ Hypergeometric(population, marked, drawn): the
// number of marked items among `drawn` items taken uniformly without
// replacement from `population`.
//
// When every binomial coefficient involved fits in 53 bits the tail is formed
// from exact integer counts and a single division; otherwise the terms are
// summed in log space. Throws DomainError if marked or drawn exceed
// population.
double hypergeometric_tail(std::uint64_t population, std::uint64_t marked, std::uint64_t drawn,
                           std::uint64_t threshold);

// log C(n, k) via lgamma; -inf when k > n.
double log_binomial(std::uint64_t n, std::uint64_t k);

}  // namespace crowdagg

namespace crowdagg {

// P(X = k) for the same distribution; 0 outside the support.
double hypergeometric_pmf(std::uint64_t population, std::uint64_t marked, std::uint64_t drawn, std::uint64_t k);

}  // namespace crowdagg
