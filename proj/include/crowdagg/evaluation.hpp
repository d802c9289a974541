#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crowdagg/mlp.hpp"
#include "crowdagg/panel.hpp"
#include "crowdagg/vote.hpp"

namespace crowdagg {

struct MajorityMethod {
  VotePolicy policy;
};
struct EliteMethod {
  double ratio = 0.05;
  VotePolicy policy;
};
struct MlpMethod {
  MlpHyperparams hyperparams;
};
using Method = std::variant<MajorityMethod, EliteMethod, MlpMethod>;

std::string method_name(const Method& method);

// k-fold or leave-one-out cross-validation. folds == 0 means leave-one-out.
struct CvSpec {
  std::size_t folds = 0;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;

  static CvSpec leave_one_out(std::size_t repeats = 1, std::uint64_t seed = 0) { return {0, repeats, seed}; }
  static CvSpec k_fold(std::size_t k, std::size_t repeats = 1, std::uint64_t seed = 0) { return {k, repeats, seed}; }
  bool is_leave_one_out() const noexcept { return folds == 0; }
};

// Which stimuli an evaluation runs over: all pooled together, one emotion,
// or each emotion separately with the fold scores concatenated.
class Scope {
 public:
  static Scope pooled() { return Scope(Kind::Pooled, Emotion::Anger); }
  static Scope each_emotion() { return Scope(Kind::EachEmotion, Emotion::Anger); }
  static Scope only(Emotion e) { return Scope(Kind::Single, e); }
  static Scope from_filter(std::optional<Emotion> e) { return e ? only(*e) : pooled(); }

  // Stimulus groups that are cross-validated independently.
  std::vector<std::pair<std::optional<Emotion>, std::vector<std::size_t>>> groups(const ResponseMatrix& m) const;
  std::string name() const;

 private:
  enum class Kind { Pooled, EachEmotion, Single };
  Scope(Kind k, Emotion e) : kind_(k), emotion_(e) {}
  Kind kind_;
  Emotion emotion_;
};

struct EvalOptions {
  // Record every stimulus read during fitting and count reads of test stimuli.
  bool audit = false;
  // Worker threads for independent folds; 0 = hardware concurrency.
  std::size_t threads = 0;
};

struct FoldScore {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::optional<Emotion> emotion;  // group the fold belongs to
  std::size_t test_size = 0;
  double accuracy = 0.0;
  double x = 0.0;  // curve point the fold contributes to (curve reports only)
};

struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t samples = 0;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

struct ExperimentReport {
  std::string experiment;  // "cross_validate", "elite_ratio_sweep", ...
  std::string method;      // "majority", "elite", "mlp"
  std::string scope;
  std::vector<FoldScore> folds;
  double mean_accuracy = 0.0;
  std::string curve_x;  // name of the curve's x column; empty when no curve
  std::vector<CurvePoint> curve;
  Settings settings;
  std::size_t audited_fits = 0;
  std::size_t leaked_reads = 0;  // test-stimulus reads during fitting (must stay 0)
};

// Settings snapshot of a method (policy, ratio, hyperparameters).
Settings method_settings(const Method& method);

// Stimuli partitioned into `folds` contiguous near-equal groups after one
// seeded shuffle. folds == 0 gives one stimulus per fold.
std::vector<std::vector<std::size_t>> make_folds(std::span<const std::size_t> stimuli, std::size_t folds,
                                                 std::uint64_t seed);

// Fit `method` on train and return per-stimulus scores on test.
// The seed feeds MLP weight initialization and shuffling.
std::vector<double> fit_and_score(const ResponseMatrix& matrix, const Method& method,
                                  std::span<const std::size_t> train, std::span<const std::size_t> test,
                                  std::uint64_t seed, AccessAudit* audit = nullptr);

ExperimentReport cross_validate(const ResponseMatrix& matrix, const Scope& scope, const Method& method,
                                const CvSpec& cv, const EvalOptions& options = {});

// Leave-one-stimulus-out over every stimulus regardless of emotion.
ExperimentReport combined_training_eval(const ResponseMatrix& matrix, const Method& method, const CvSpec& cv,
                                        const EvalOptions& options = {});

// One elite cross-validation per ratio; curve x = ratio, in input order.
ExperimentReport elite_ratio_sweep(const ResponseMatrix& matrix, const Scope& scope, std::span<const double> ratios,
                                   const CvSpec& cv, VotePolicy policy, const EvalOptions& options = {});

// One k-fold cross-validation per fold count (k equal to the group size is
// leave-one-out); curve sorted by k.
ExperimentReport fold_count_curve(const ResponseMatrix& matrix, const Scope& scope, const Method& method,
                                  std::span<const std::size_t> fold_counts, std::size_t repeats, std::uint64_t seed,
                                  const EvalOptions& options = {});

// For each size, `repeats` uniformly drawn participant subsets (a single one
// when size == P), each scored by leave-one-out within the scope; curve
// reports mean and standard deviation over subsets.
ExperimentReport subset_accuracy_curve(const ResponseMatrix& matrix, const Scope& scope,
                                       std::span<const std::size_t> sizes, std::size_t repeats,
                                       const Method& method, std::uint64_t seed, const EvalOptions& options = {});

enum class CellKind : std::uint8_t { Transfer, CrossValidated };

struct TransferGrid {
  std::string method;
  // accuracy[train][test], indexed by Emotion.
  std::array<std::array<double, 4>, 4> accuracy{};
  std::array<std::array<CellKind, 4>, 4> kind{};
  Settings settings;
  std::size_t audited_fits = 0;
  std::size_t leaked_reads = 0;

  double off_diagonal_mean() const;
};

// Off-diagonal: fit on every stimulus of the row emotion, score on every
// stimulus of the column emotion. Diagonal: within-emotion cross-validation.
// Throws DomainError if an emotion is missing.
TransferGrid transfer_matrix(const ResponseMatrix& matrix, const Method& method, const CvSpec& cv_for_diagonal,
                             const EvalOptions& options = {});

struct OverlapResult {
  std::size_t n = 0;
  std::size_t overlap_count = 0;
  double overlap_rate = 0.0;
  double null_probability = 1.0;
};

// Top-n by effective weight vs top-n by individual accuracy (over the
// stimuli the model was trained on); null probability is the hypergeometric
// tail of the observed overlap.
OverlapResult weight_accuracy_overlap(const MlpModel& model, const ResponseMatrix& matrix, std::size_t top_n,
                                      WeightMode mode = WeightMode::Linearized);

struct EliteOverlap {
  std::size_t top_n = 0;
  std::array<std::vector<std::size_t>, 4> top_sets;  // indexed by Emotion
  std::size_t intersection_count = 0;
  double rate = 0.0;  // intersection_count / top_n
  // Jaccard index for each emotion pair (a < b).
  std::vector<std::pair<std::pair<Emotion, Emotion>, double>> pairwise_jaccard;
};

EliteOverlap elite_overlap_across_emotions(const ResponseMatrix& matrix, std::size_t top_n);

// Distribution of |S1 ∩ ... ∩ Sk| for k independent uniform n-subsets of a
// population, built by chaining hypergeometric draws. Index = intersection size.
std::vector<double> random_intersection_distribution(std::size_t population, std::size_t n, std::size_t sets);

// Mean four-way overlap rate when each emotion's accuracy vector is randomly
// permuted across participants (same top-n and tie-break rules).
double permutation_overlap_baseline(const ResponseMatrix& matrix, std::size_t top_n, std::size_t trials,
                                    std::uint64_t seed);

}  // namespace crowdagg
