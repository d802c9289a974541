#include "crowdagg/vote.hpp"

#include "crowdagg/error.hpp"
#include "crowdagg/kernels.hpp"

namespace crowdagg {

std::string_view to_string(TieBreak t) noexcept {
  switch (t) {
    case TieBreak::Acted: return "acted";
    case TieBreak::Genuine: return "genuine";
    case TieBreak::HalfCredit: return "half";
  }
  return "unknown";
}

std::optional<TieBreak> parse_tie_break(std::string_view name) noexcept {
  for (const auto t : {TieBreak::Acted, TieBreak::Genuine, TieBreak::HalfCredit}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

double score(Verdict v, std::uint8_t truth) noexcept {
  switch (v) {
    case Verdict::HalfCredit: return 0.5;
    case Verdict::Genuine: return truth == kGenuine ? 1.0 : 0.0;
    case Verdict::Acted: return truth == kActed ? 1.0 : 0.0;
  }
  return 0.0;
}

Verdict verdict_from_counts(std::size_t ones, std::size_t total, VotePolicy policy) {
  if (total == 0) throw DomainError("majority vote over an empty set of judgments");
  const std::size_t zeros = total - ones;
  if (ones > zeros) return Verdict::Genuine;
  if (zeros > ones) return Verdict::Acted;
  switch (policy.tie_break) {
    case TieBreak::Acted: return Verdict::Acted;
    case TieBreak::Genuine: return Verdict::Genuine;
    case TieBreak::HalfCredit: return Verdict::HalfCredit;
  }
  return Verdict::Acted;
}

Verdict majority_vote(std::span<const std::uint8_t> column, VotePolicy policy) {
  const auto ones = kernels::active().count_ones(column.data(), column.size());
  return verdict_from_counts(ones, column.size(), policy);
}

}  // namespace crowdagg
