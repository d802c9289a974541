#include "crowdagg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_set>

#include "crowdagg/error.hpp"
#include "crowdagg/report.hpp"
#include "crowdagg/rng.hpp"

namespace crowdagg {

namespace {

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const auto x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / double(v.size() - 1));
}

std::uint64_t group_tag(const std::optional<Emotion>& e) { return e ? std::uint64_t(*e) : 4; }

double mean_fold_accuracy(const std::vector<FoldScore>& folds) {
  if (folds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : folds) sum += f.accuracy;
  return sum / double(folds.size());
}

}  // namespace

std::string method_name(const Method& method) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MajorityMethod>) return "majority";
        if constexpr (std::is_same_v<T, EliteMethod>) return "elite";
        return "mlp";
      },
      method);
}

Settings method_settings(const Method& method) {
  Settings s{{"method", method_name(method)}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MajorityMethod>) {
          s.emplace_back("tie_break", std::string(to_string(m.policy.tie_break)));
        } else if constexpr (std::is_same_v<T, EliteMethod>) {
          s.emplace_back("ratio", format_real(m.ratio));
          s.emplace_back("tie_break", std::string(to_string(m.policy.tie_break)));
        } else {
          const auto& hp = m.hyperparams;
          s.emplace_back("hidden_units", std::to_string(hp.hidden_units));
          s.emplace_back("epochs", std::to_string(hp.epochs));
          s.emplace_back("learning_rate", format_real(hp.learning_rate));
          s.emplace_back("init_range", format_real(hp.init_range));
          s.emplace_back("model_seed", std::to_string(hp.seed));
          s.emplace_back("decision_threshold", "0.5");
        }
      },
      method);
  return s;
}

std::vector<std::pair<std::optional<Emotion>, std::vector<std::size_t>>> Scope::groups(const ResponseMatrix& m) const {
  std::vector<std::pair<std::optional<Emotion>, std::vector<std::size_t>>> out;
  switch (kind_) {
    case Kind::Pooled:
      out.emplace_back(std::nullopt, m.stimulus_indices());
      break;
    case Kind::Single: {
      auto idx = m.stimulus_indices(emotion_);
      if (idx.empty()) throw DomainError("no stimuli tagged '" + std::string(to_string(emotion_)) + "'");
      out.emplace_back(emotion_, std::move(idx));
      break;
    }
    case Kind::EachEmotion:
      for (const auto e : kAllEmotions) {
        auto idx = m.stimulus_indices(e);
        if (!idx.empty()) out.emplace_back(e, std::move(idx));
      }
      break;
  }
  return out;
}

std::string Scope::name() const {
  switch (kind_) {
    case Kind::Pooled: return "all";
    case Kind::EachEmotion: return "each";
    case Kind::Single: return std::string(to_string(emotion_));
  }
  return "unknown";
}

std::vector<std::vector<std::size_t>> make_folds(std::span<const std::size_t> stimuli, std::size_t folds,
                                                 std::uint64_t seed) {
  const std::size_t n = stimuli.size();
  if (folds == 0) folds = n;
  if (folds > n) {
    throw ConfigError("cannot split " + std::to_string(n) + " stimuli into " + std::to_string(folds) + " folds");
  }
  std::vector<std::size_t> order(stimuli.begin(), stimuli.end());
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t len = n / folds + (f < n % folds ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                  order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(out[f].begin(), out[f].end());
    pos += len;
  }
  return out;
}

std::vector<double> fit_and_score(const ResponseMatrix& matrix, const Method& method,
                                  std::span<const std::size_t> train, std::span<const std::size_t> test,
                                  std::uint64_t seed, AccessAudit* audit) {
  std::vector<double> scores;
  scores.reserve(test.size());
  const TrainingSet training(matrix, train, audit);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MajorityMethod>) {
          for (const auto s : test) scores.push_back(score(majority_vote(matrix.column(s), m.policy), matrix.stimulus(s).truth));
        } else if constexpr (std::is_same_v<T, EliteMethod>) {
          const auto elites = select_elites(training, m.ratio);
          for (const auto s : test) {
            scores.push_back(score(elite_vote(matrix.column(s), elites, m.policy), matrix.stimulus(s).truth));
          }
        } else {
          auto hp = m.hyperparams;
          hp.seed = derive_seed(hp.seed, {seed});
          const auto model = train_mlp(training, hp);
          for (const auto s : test) {
            const auto verdict = model.predict(matrix.column(s)) >= 0.5 ? Verdict::Genuine : Verdict::Acted;
            scores.push_back(score(verdict, matrix.stimulus(s).truth));
          }
        }
      },
      method);
  return scores;
}

namespace {

std::size_t count_leaks(const AccessAudit& audit, std::span<const std::size_t> test) {
  const std::unordered_set<std::size_t> test_set(test.begin(), test.end());
  std::size_t leaks = 0;
  for (const auto s : audit.accessed()) leaks += test_set.count(s);
  return leaks;
}

struct FoldJob {
  std::optional<Emotion> emotion;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
};

bool needs_fit(const Method& m) { return !std::holds_alternative<MajorityMethod>(m); }

}  // namespace

ExperimentReport cross_validate(const ResponseMatrix& matrix, const Scope& scope, const Method& method,
                                const CvSpec& cv, const EvalOptions& options) {
  if (cv.repeats == 0) throw ConfigError("repeats must be >= 1");
  if (!cv.is_leave_one_out() && cv.folds < 2) throw ConfigError("k-fold cross-validation needs at least 2 folds");

  std::vector<FoldJob> jobs;
  for (const auto& [emotion, stimuli] : scope.groups(matrix)) {
    if (stimuli.size() < 2) {
      throw ConfigError("cross-validation needs at least 2 stimuli, scope has " + std::to_string(stimuli.size()));
    }
    if (!cv.is_leave_one_out() && cv.folds > stimuli.size()) {
      throw ConfigError(std::to_string(cv.folds) + " folds requested but only " + std::to_string(stimuli.size()) +
                        " stimuli in scope");
    }
    for (std::size_t r = 0; r < cv.repeats; ++r) {
      const auto folds = make_folds(stimuli, cv.folds, derive_seed(cv.seed, {group_tag(emotion), r}));
      for (std::size_t f = 0; f < folds.size(); ++f) {
        FoldJob job;
        job.emotion = emotion;
        job.repeat = r;
        job.fold = f;
        job.test = folds[f];
        for (std::size_t g = 0; g < folds.size(); ++g) {
          if (g != f) job.train.insert(job.train.end(), folds[g].begin(), folds[g].end());
        }
        std::sort(job.train.begin(), job.train.end());
        job.seed = derive_seed(cv.seed, {group_tag(emotion), r, f, 1});
        jobs.push_back(std::move(job));
      }
    }
  }

  std::vector<FoldScore> scores(jobs.size());
  std::vector<std::size_t> leaks(jobs.size(), 0);
  parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    AccessAudit audit;
    const auto s = fit_and_score(matrix, method, job.train, job.test, job.seed, options.audit ? &audit : nullptr);
    if (options.audit) leaks[j] = count_leaks(audit, job.test);
    scores[j] = FoldScore{job.repeat, job.fold, job.emotion, job.test.size(), mean_of(s), 0.0};
  });

  ExperimentReport report;
  report.experiment = "cross_validate";
  report.method = method_name(method);
  report.scope = scope.name();
  report.folds = std::move(scores);
  report.mean_accuracy = mean_fold_accuracy(report.folds);
  report.settings = method_settings(method);
  report.settings.emplace_back("scope", scope.name());
  report.settings.emplace_back("folds", cv.is_leave_one_out() ? "loo" : std::to_string(cv.folds));
  report.settings.emplace_back("repeats", std::to_string(cv.repeats));
  report.settings.emplace_back("cv_seed", std::to_string(cv.seed));
  if (options.audit && needs_fit(method)) report.audited_fits = jobs.size();
  report.leaked_reads = std::accumulate(leaks.begin(), leaks.end(), std::size_t{0});
  return report;
}

ExperimentReport combined_training_eval(const ResponseMatrix& matrix, const Method& method, const CvSpec& cv,
                                        const EvalOptions& options) {
  auto report = cross_validate(matrix, Scope::pooled(), method, cv, options);
  report.experiment = "combined_training_eval";
  return report;
}

namespace {

// Appends a curve point built from the folds of `part` and moves the folds
// into `into`, tagged with x.
void absorb(ExperimentReport& into, ExperimentReport&& part, double x) {
  std::vector<double> acc;
  for (auto& f : part.folds) {
    f.x = x;
    acc.push_back(f.accuracy);
    into.folds.push_back(f);
  }
  into.curve.push_back(CurvePoint{x, mean_of(acc), sample_stddev(acc), acc.size()});
  into.audited_fits += part.audited_fits;
  into.leaked_reads += part.leaked_reads;
}

}  // namespace

ExperimentReport elite_ratio_sweep(const ResponseMatrix& matrix, const Scope& scope, std::span<const double> ratios,
                                   const CvSpec& cv, VotePolicy policy, const EvalOptions& options) {
  if (ratios.empty()) throw DomainError("elite ratio sweep needs at least one ratio");
  for (const auto r : ratios) {
    if (!(r > 0.0 && r <= 1.0)) throw DomainError("elite ratio " + format_real(r) + " outside (0, 1]");
  }
  ExperimentReport report;
  report.experiment = "elite_ratio_sweep";
  report.method = "elite";
  report.scope = scope.name();
  report.curve_x = "ratio";
  for (const auto r : ratios) absorb(report, cross_validate(matrix, scope, EliteMethod{r, policy}, cv, options), r);
  report.mean_accuracy = mean_fold_accuracy(report.folds);
  report.settings = {{"method", "elite"},
                     {"tie_break", std::string(to_string(policy.tie_break))},
                     {"scope", scope.name()},
                     {"folds", cv.is_leave_one_out() ? "loo" : std::to_string(cv.folds)},
                     {"repeats", std::to_string(cv.repeats)},
                     {"cv_seed", std::to_string(cv.seed)}};
  std::string list;
  for (const auto r : ratios) list += (list.empty() ? "" : ";") + format_real(r);
  report.settings.emplace_back("ratios", list);
  return report;
}

ExperimentReport fold_count_curve(const ResponseMatrix& matrix, const Scope& scope, const Method& method,
                                  std::span<const std::size_t> fold_counts, std::size_t repeats, std::uint64_t seed,
                                  const EvalOptions& options) {
  if (fold_counts.empty()) throw DomainError("fold-count curve needs at least one fold count");
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (const auto& g : scope.groups(matrix)) smallest = std::min(smallest, g.second.size());
  std::vector<std::size_t> ks(fold_counts.begin(), fold_counts.end());
  std::sort(ks.begin(), ks.end());
  for (const auto k : ks) {
    if (k < 2 || k > smallest) {
      throw ConfigError("fold count " + std::to_string(k) + " outside [2, " + std::to_string(smallest) + "]");
    }
  }
  ExperimentReport report;
  report.experiment = "fold_count_curve";
  report.method = method_name(method);
  report.scope = scope.name();
  report.curve_x = "folds";
  for (const auto k : ks) {
    absorb(report, cross_validate(matrix, scope, method, CvSpec::k_fold(k, repeats, derive_seed(seed, {k})), options),
           double(k));
  }
  report.mean_accuracy = mean_fold_accuracy(report.folds);
  report.settings = method_settings(method);
  report.settings.emplace_back("scope", scope.name());
  report.settings.emplace_back("repeats", std::to_string(repeats));
  report.settings.emplace_back("seed", std::to_string(seed));
  return report;
}

ExperimentReport subset_accuracy_curve(const ResponseMatrix& matrix, const Scope& scope,
                                       std::span<const std::size_t> sizes, std::size_t repeats,
                                       const Method& method, std::uint64_t seed, const EvalOptions& options) {
  if (sizes.empty()) throw DomainError("subset curve needs at least one size");
  if (repeats == 0) throw ConfigError("repeats must be >= 1");
  const std::size_t p = matrix.participants();
  for (const auto n : sizes) {
    if (n == 0 || n > p) {
      throw DomainError("subset size " + std::to_string(n) + " outside [1, " + std::to_string(p) + "]");
    }
  }
  ExperimentReport report;
  report.experiment = "subset_accuracy_curve";
  report.method = method_name(method);
  report.scope = scope.name();
  report.curve_x = "participants";
  for (const auto n : sizes) {
    const std::size_t draws = (n == p) ? 1 : repeats;
    std::vector<double> means;
    for (std::size_t r = 0; r < draws; ++r) {
      std::vector<std::size_t> rows(p);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      Rng rng(derive_seed(seed, {n, r}));
      rng.shuffle(std::span(rows));
      rows.resize(n);
      std::sort(rows.begin(), rows.end());
      const auto sub = matrix.select_participants(rows);
      auto part = cross_validate(sub, scope, method, CvSpec::leave_one_out(1, derive_seed(seed, {n, r, 1})), options);
      means.push_back(part.mean_accuracy);
      for (auto& f : part.folds) {
        f.x = double(n);
        f.repeat = r;
        report.folds.push_back(f);
      }
      report.audited_fits += part.audited_fits;
      report.leaked_reads += part.leaked_reads;
    }
    report.curve.push_back(CurvePoint{double(n), mean_of(means), sample_stddev(means), means.size()});
  }
  report.mean_accuracy = mean_fold_accuracy(report.folds);
  report.settings = method_settings(method);
  report.settings.emplace_back("scope", scope.name());
  report.settings.emplace_back("folds", "loo");
  report.settings.emplace_back("repeats", std::to_string(repeats));
  report.settings.emplace_back("seed", std::to_string(seed));
  return report;
}

double TransferGrid::off_diagonal_mean() const {
  double sum = 0.0;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (r != c) sum += accuracy[r][c];
    }
  }
  return sum / 12.0;
}

TransferGrid transfer_matrix(const ResponseMatrix& matrix, const Method& method, const CvSpec& cv_for_diagonal,
                             const EvalOptions& options) {
  std::array<std::vector<std::size_t>, 4> by_emotion;
  for (const auto e : kAllEmotions) {
    by_emotion[std::size_t(e)] = matrix.stimulus_indices(e);
    if (by_emotion[std::size_t(e)].empty()) {
      throw DomainError("transfer matrix needs all four emotions; '" + std::string(to_string(e)) + "' is missing");
    }
  }
  TransferGrid grid;
  grid.method = method_name(method);
  grid.settings = method_settings(method);
  grid.settings.emplace_back("diagonal_folds",
                             cv_for_diagonal.is_leave_one_out() ? "loo" : std::to_string(cv_for_diagonal.folds));
  grid.settings.emplace_back("diagonal_repeats", std::to_string(cv_for_diagonal.repeats));
  grid.settings.emplace_back("cv_seed", std::to_string(cv_for_diagonal.seed));

  // Rows 0-3: transfer fits; rows 4-7: diagonal cross-validation.
  std::array<std::array<double, 4>, 4> acc{};
  std::vector<std::size_t> leaks(8, 0);
  std::vector<std::size_t> fits(8, 0);
  parallel_for(8, options.threads, [&](std::size_t job) {
    const std::size_t r = job % 4;
    if (job < 4) {
      std::vector<std::size_t> test;
      for (std::size_t c = 0; c < 4; ++c) {
        if (c != r) test.insert(test.end(), by_emotion[c].begin(), by_emotion[c].end());
      }
      AccessAudit audit;
      const auto scores = fit_and_score(matrix, method, by_emotion[r], test, derive_seed(cv_for_diagonal.seed, {100 + r}),
                                        options.audit ? &audit : nullptr);
      if (options.audit) {
        leaks[job] = count_leaks(audit, test);
        fits[job] = needs_fit(method) ? 1 : 0;
      }
      std::size_t pos = 0;
      for (std::size_t c = 0; c < 4; ++c) {
        if (c == r) continue;
        const std::size_t len = by_emotion[c].size();
        acc[r][c] = mean_of(std::span(scores).subspan(pos, len));
        pos += len;
      }
    } else {
      EvalOptions inner = options;
      inner.threads = 1;
      const auto rep = cross_validate(matrix, Scope::only(kAllEmotions[r]), method, cv_for_diagonal, inner);
      acc[r][r] = rep.mean_accuracy;
      leaks[job] = rep.leaked_reads;
      fits[job] = rep.audited_fits;
    }
  });
  grid.accuracy = acc;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) grid.kind[r][c] = (r == c) ? CellKind::CrossValidated : CellKind::Transfer;
  }
  grid.leaked_reads = std::accumulate(leaks.begin(), leaks.end(), std::size_t{0});
  grid.audited_fits = std::accumulate(fits.begin(), fits.end(), std::size_t{0});
  return grid;
}

}  // namespace crowdagg
