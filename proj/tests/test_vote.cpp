#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/rng.hpp"
#include "crowdagg/vote.hpp"

namespace crowdagg {
namespace {

using Col = std::vector<std::uint8_t>;

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote(Col{1, 1, 1}), Verdict::Genuine);
  EXPECT_EQ(majority_vote(Col{1, 0}, {TieBreak::Acted}), Verdict::Acted);
  EXPECT_EQ(majority_vote(Col{1, 0}, {TieBreak::Genuine}), Verdict::Genuine);
  EXPECT_EQ(majority_vote(Col{1, 0}, {TieBreak::HalfCredit}), Verdict::HalfCredit);
  EXPECT_EQ(majority_vote(Col{1, 1, 0, 0, 1}), Verdict::Genuine);
  EXPECT_EQ(majority_vote(Col{0, 0, 1}), Verdict::Acted);
  EXPECT_THROW(majority_vote(Col{}), DomainError);
}

TEST(MajorityVote, Scoring) {
  EXPECT_EQ(score(Verdict::Genuine, 1), 1.0);
  EXPECT_EQ(score(Verdict::Genuine, 0), 0.0);
  EXPECT_EQ(score(Verdict::Acted, 0), 1.0);
  EXPECT_EQ(score(Verdict::HalfCredit, 0), 0.5);
  EXPECT_EQ(score(Verdict::HalfCredit, 1), 0.5);
}

TEST(MajorityVote, PermutationInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Col v(1 + rng.below(70));
    for (auto& x : v) x = static_cast<std::uint8_t>(rng.below(2));
    const auto expected = majority_vote(v, {TieBreak::HalfCredit});
    rng.shuffle(std::span(v));
    EXPECT_EQ(majority_vote(v, {TieBreak::HalfCredit}), expected);
  }
}

TEST(EliteSize, RoundingRule) {
  EXPECT_EQ(elite_size(0.05, 117), 6u);  // round(5.85)
  EXPECT_EQ(elite_size(0.3, 10), 3u);
  EXPECT_EQ(elite_size(0.001, 117), 1u);
  EXPECT_EQ(elite_size(1.0, 117), 117u);
  EXPECT_EQ(elite_size(0.5, 5), 3u);  // 2.5 rounds half up
  EXPECT_THROW(elite_size(0.0, 10), DomainError);
  EXPECT_THROW(elite_size(1.1, 10), DomainError);
}

TEST(SelectElites, DummyPanelPicksThePerfectThree) {
  const auto m = dummy_panel(3, 7, 20, 5);
  const auto train = m.stimulus_indices();
  const auto e = select_elites(m, train, 0.3);
  EXPECT_EQ(e.indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(e.training_accuracies, (std::vector<double>{1.0, 1.0, 1.0}));
  for (std::size_t s = 0; s < m.stimuli(); ++s) {
    EXPECT_EQ(score(elite_vote(m, e, s), m.truth()[s]), 1.0);
  }
}

TEST(SelectElites, IndexTieBreak) {
  std::vector<Stimulus> st{{"a", Emotion::Anger, 1}, {"b", Emotion::Anger, 0}};
  // four participants, each correct on exactly one stimulus
  const ResponseMatrix m({"p0", "p1", "p2", "p3"}, st, {1, 1, 0, 0, 1, 1, 0, 0});
  const std::vector<std::size_t> train{0, 1};
  EXPECT_EQ(select_elites(m, train, 0.5).indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(select_elites(m, train, 1.0).indices, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_THROW(select_elites(m, std::vector<std::size_t>{}, 0.5), DomainError);
}

TEST(SelectElites, OrderingInvariantsOnRandomPanels) {
  PanelConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto m = generate_panel(cfg).matrix;
    const auto train = m.stimulus_indices(Emotion::Smile);
    const auto all = select_elites(m, train, 1.0);
    ASSERT_EQ(all.indices.size(), m.participants());
    auto sorted = all.indices;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t k = 1; k < all.indices.size(); ++k) {
      const double a = all.training_accuracies[k - 1], b = all.training_accuracies[k];
      EXPECT_TRUE(a > b || (a == b && all.indices[k - 1] < all.indices[k]));
    }
    // Restriction to everyone is the plain majority vote.
    for (std::size_t s = 0; s < m.stimuli(); ++s) {
      EXPECT_EQ(elite_vote(m, all, s, {TieBreak::HalfCredit}), majority_vote(m.column(s), {TieBreak::HalfCredit}));
    }
  }
}

TEST(EliteVote, SingleMemberEchoesJudgment) {
  const auto m = dummy_panel(1, 2, 6, 2);
  EliteSet single;
  single.indices = {2};
  for (std::size_t s = 0; s < m.stimuli(); ++s) {
    EXPECT_EQ(static_cast<std::uint8_t>(elite_vote(m, single, s)), m.at(2, s));
  }
  EXPECT_THROW(elite_vote(m, EliteSet{}, 0), DomainError);
}

}  // namespace
}  // namespace crowdagg
