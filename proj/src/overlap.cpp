#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "crowdagg/error.hpp"
#include "crowdagg/evaluation.hpp"
#include "crowdagg/hypergeometric.hpp"
#include "crowdagg/rng.hpp"

namespace crowdagg {

namespace {

std::size_t intersection_size(std::vector<std::size_t> a, std::vector<std::size_t> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.size();
}

std::size_t four_way_intersection(const std::array<std::vector<std::size_t>, 4>& sets) {
  std::vector<std::size_t> common = sets[0];
  std::sort(common.begin(), common.end());
  for (std::size_t k = 1; k < sets.size(); ++k) {
    auto next = sets[k];
    std::sort(next.begin(), next.end());
    std::vector<std::size_t> out;
    std::set_intersection(common.begin(), common.end(), next.begin(), next.end(), std::back_inserter(out));
    common = std::move(out);
  }
  return common.size();
}

}  // namespace

OverlapResult weight_accuracy_overlap(const MlpModel& model, const ResponseMatrix& matrix, std::size_t top_n,
                                      WeightMode mode) {
  const std::size_t p = matrix.participants();
  if (model.inputs() != p) {
    throw DomainError("model has " + std::to_string(model.inputs()) + " inputs but the panel has " +
                      std::to_string(p) + " participants");
  }
  if (top_n == 0 || top_n > p) throw DomainError("top_n must be in [1, " + std::to_string(p) + "]");

  std::vector<std::size_t> stimuli;
  if (model.trained_on().empty()) {
    stimuli = matrix.stimulus_indices();
  } else {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t s = 0; s < matrix.stimuli(); ++s) index.emplace(matrix.stimulus(s).id, s);
    for (const auto& id : model.trained_on()) {
      const auto it = index.find(id);
      if (it == index.end()) throw DomainError("model was trained on stimulus '" + id + "', absent from this panel");
      stimuli.push_back(it->second);
    }
  }
  const auto weights = effective_weights(model, mode, matrix, stimuli);
  const auto accuracy = individual_accuracies(matrix, stimuli);

  OverlapResult out;
  out.n = top_n;
  out.overlap_count = intersection_size(top_indices(weights, top_n), top_indices(accuracy, top_n));
  out.overlap_rate = double(out.overlap_count) / double(top_n);
  out.null_probability = hypergeometric_tail(p, top_n, top_n, out.overlap_count);
  return out;
}

EliteOverlap elite_overlap_across_emotions(const ResponseMatrix& matrix, std::size_t top_n) {
  if (top_n == 0) throw DomainError("top_n must be >= 1");
  if (top_n > matrix.participants()) throw DomainError("top_n exceeds the number of participants");
  EliteOverlap out;
  out.top_n = top_n;
  for (const auto e : kAllEmotions) {
    out.top_sets[std::size_t(e)] = top_indices(individual_accuracies(matrix, e), top_n);
  }
  out.intersection_count = four_way_intersection(out.top_sets);
  out.rate = double(out.intersection_count) / double(top_n);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      const auto inter = intersection_size(out.top_sets[a], out.top_sets[b]);
      const double uni = double(2 * top_n - inter);
      out.pairwise_jaccard.push_back({{kAllEmotions[a], kAllEmotions[b]}, double(inter) / uni});
    }
  }
  return out;
}

std::vector<double> random_intersection_distribution(std::size_t population, std::size_t n, std::size_t sets) {
  if (n > population) throw DomainError("subset size exceeds population");
  if (sets == 0) throw DomainError("need at least one set");
  std::vector<double> dist(n + 1, 0.0);
  dist[n] = 1.0;
  for (std::size_t k = 1; k < sets; ++k) {
    std::vector<double> next(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (dist[i] == 0.0) continue;
      for (std::size_t j = 0; j <= i; ++j) next[j] += dist[i] * hypergeometric_pmf(population, i, n, j);
    }
    dist = std::move(next);
  }
  return dist;
}

double permutation_overlap_baseline(const ResponseMatrix& matrix, std::size_t top_n, std::size_t trials,
                                    std::uint64_t seed) {
  if (trials == 0) throw DomainError("trials must be >= 1");
  std::array<std::vector<double>, 4> acc;
  for (const auto e : kAllEmotions) acc[std::size_t(e)] = individual_accuracies(matrix, e);
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::array<std::vector<std::size_t>, 4> sets;
    for (std::size_t e = 0; e < 4; ++e) {
      auto shuffled = acc[e];
      rng.shuffle(std::span(shuffled));
      sets[e] = top_indices(shuffled, top_n);
    }
    total += double(four_way_intersection(sets)) / double(top_n);
  }
  return total / double(trials);
}

}  // namespace crowdagg
