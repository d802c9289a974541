#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "crowdagg/training_set.hpp"

namespace crowdagg {

enum class TieBreak : std::uint8_t { Acted, Genuine, HalfCredit };

std::string_view to_string(TieBreak t) noexcept;
std::optional<TieBreak> parse_tie_break(std::string_view name) noexcept;

struct VotePolicy {
  TieBreak tie_break = TieBreak::Acted;
};

// Outcome of a vote: a label, or a tie scored as half credit.
enum class Verdict : std::uint8_t { Acted = 0, Genuine = 1, HalfCredit = 2 };

// 1 for a correct verdict, 0 for a wrong one, 0.5 for a half-credit tie.
double score(Verdict v, std::uint8_t truth) noexcept;

Verdict verdict_from_counts(std::size_t ones, std::size_t total, VotePolicy policy);

// Throws DomainError on an empty column.
Verdict majority_vote(std::span<const std::uint8_t> column, VotePolicy policy = {});

struct EliteSet {
  std::vector<std::size_t> indices;          // accuracy descending, index ascending
  std::vector<double> training_accuracies;   // parallel to indices
  double ratio = 1.0;
};

// clamp(round_half_up(ratio * participants), 1, participants)
std::size_t elite_size(double ratio, std::size_t participants);

// Throws DomainError for ratio outside (0, 1] or an empty training set.
EliteSet select_elites(const TrainingSet& training, double ratio);
EliteSet select_elites(const ResponseMatrix& matrix, std::span<const std::size_t> training_stimuli, double ratio);

// The top_n participants by the given scores (descending, index tie-break).
std::vector<std::size_t> top_indices(std::span<const double> scores, std::size_t top_n);

// Majority vote of the elite rows on one stimulus column.
Verdict elite_vote(std::span<const std::uint8_t> column, const EliteSet& elites, VotePolicy policy = {});
Verdict elite_vote(const ResponseMatrix& matrix, const EliteSet& elites, std::size_t stimulus, VotePolicy policy = {});

}  // namespace crowdagg
