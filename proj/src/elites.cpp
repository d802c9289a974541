#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/vote.hpp"

namespace crowdagg {

std::vector<double> TrainingSet::accuracies() const {
  std::vector<std::size_t> correct(participants(), 0);
  for (std::size_t k = 0; k < size(); ++k) {
    const auto col = column(k);
    const auto t = truth(k);
    for (std::size_t i = 0; i < col.size(); ++i) correct[i] += (col[i] == t) ? 1 : 0;
  }
  std::vector<double> acc(correct.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = double(correct[i]) / double(size());
  return acc;
}

std::size_t elite_size(double ratio, std::size_t participants) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("elite ratio must be in (0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(ratio * double(participants) + 0.5));
  return std::clamp<std::size_t>(k, 1, participants);
}

std::vector<std::size_t> top_indices(std::span<const double> scores, std::size_t top_n) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  top_n = std::min(top_n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(top_n);
  return order;
}

EliteSet select_elites(const TrainingSet& training, double ratio) {
  const auto k = elite_size(ratio, training.participants());
  if (training.empty()) throw DomainError("elite selection needs at least one training stimulus");
  const auto acc = training.accuracies();
  EliteSet out;
  out.ratio = ratio;
  out.indices = top_indices(acc, k);
  out.training_accuracies.reserve(k);
  for (const auto i : out.indices) out.training_accuracies.push_back(acc[i]);
  return out;
}

EliteSet select_elites(const ResponseMatrix& matrix, std::span<const std::size_t> training_stimuli, double ratio) {
  return select_elites(TrainingSet(matrix, training_stimuli), ratio);
}

Verdict elite_vote(std::span<const std::uint8_t> column, const EliteSet& elites, VotePolicy policy) {
  if (elites.indices.empty()) throw DomainError("elite vote with an empty elite set");
  std::size_t ones = 0;
  for (const auto i : elites.indices) {
    if (i >= column.size()) throw DomainError("elite index out of range for this column");
    ones += column[i];
  }
  return verdict_from_counts(ones, elites.indices.size(), policy);
}

Verdict elite_vote(const ResponseMatrix& matrix, const EliteSet& elites, std::size_t stimulus, VotePolicy policy) {
  return elite_vote(matrix.column(stimulus), elites, policy);
}

}  // namespace crowdagg
