// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "crowdagg/evaluation.hpp"
#include "crowdagg/hypergeometric.hpp"
#include "crowdagg/kernels.hpp"
#include "crowdagg/mlp.hpp"
#include "crowdagg/panel.hpp"
#include "crowdagg/rng.hpp"

namespace fs = std::filesystem;
using namespace crowdagg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && secs > limit_seconds) {
    o.pass = false;
    o.detail += "; over time limit " + std::to_string(int(limit_seconds)) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

PanelConfig calibrated(std::uint64_t seed) {
  PanelConfig cfg;
  cfg.seed = seed;
  return cfg;
}

// 1 -------------------------------------------------------------------------
Outcome dummy_reproduction() {
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = dummy_panel(3, 7, 20, seed);
    MlpHyperparams hp;
    hp.seed = seed;
    const auto model = train_mlp(m, m.stimulus_indices(), hp);
    const auto w = effective_weights(model);
    std::size_t pos = 0, neg = 0;
    bool layout = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      pos += w[i] > 0.0;
      neg += w[i] < 0.0;
      layout = layout && ((i < 3) == (w[i] > 0.0));
    }
    MlpMethod method;
    method.hyperparams.seed = seed;
    const auto loo = cross_validate(m, Scope::pooled(), method, CvSpec::leave_one_out(1, seed));
    const auto again = cross_validate(m, Scope::pooled(), method, CvSpec::leave_one_out(1, seed));
    const bool same = train_mlp(m, m.stimulus_indices(), hp) == model && again.folds.size() == loo.folds.size() &&
                      again.mean_accuracy == loo.mean_accuracy;
    if (pos != 3 || neg != 7 || !layout || loo.mean_accuracy != 1.0 || !same) {
      return {false, "seed " + std::to_string(seed) + ": " + std::to_string(pos) + " positive, " +
                         std::to_string(neg) + " negative, LOOCV " + fmt(loo.mean_accuracy) +
                         (same ? "" : ", not deterministic")};
    }
  }
  return {true, "5 seeds: weights 3+/7- on the truthful/complement rows, LOOCV 1.0, repeat runs identical"};
}

// 2 -------------------------------------------------------------------------
Outcome dummy_ordering() {
  const auto m = dummy_panel(3, 7, 20, 1);
  const auto loo = CvSpec::leave_one_out();
  const double maj = cross_validate(m, Scope::pooled(), MajorityMethod{}, loo).mean_accuracy;
  const double eli = cross_validate(m, Scope::pooled(), EliteMethod{0.3, {}}, loo).mean_accuracy;
  const double mlp = cross_validate(m, Scope::pooled(), MlpMethod{}, loo).mean_accuracy;
  return {maj == 0.0 && eli == 1.0 && mlp == 1.0,
          "majority " + fmt(maj) + ", elite(0.3) " + fmt(eli) + ", mlp LOOCV " + fmt(mlp)};
}

// 3 -------------------------------------------------------------------------
Outcome gradient_check() {
  Rng rng(31337);
  double worst = 0.0;
  std::size_t pairs = 0, compared = 0;
  for (; pairs < 200; ++pairs) {
    MlpHyperparams hp;
    hp.hidden_units = 1 + rng.below(12);
    const std::size_t inputs = 1 + rng.below(40);
    MlpModel model(inputs, hp);
    model.randomize(rng, 1.0);
    std::vector<double> x(inputs);
    for (auto& v : x) v = double(rng.below(2));
    const auto y = static_cast<std::uint8_t>(rng.below(2));
    const auto g = model.gradient(x, y);
    std::vector<double> analytic = g.input_weights;
    analytic.insert(analytic.end(), g.hidden_biases.begin(), g.hidden_biases.end());
    analytic.insert(analytic.end(), g.output_weights.begin(), g.output_weights.end());
    analytic.push_back(g.output_bias);
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double orig = model.parameter(k);
      model.set_parameter(k, orig + 1e-5);
      const double up = model.loss(x, y);
      model.set_parameter(k, orig - 1e-5);
      const double down = model.loss(x, y);
      model.set_parameter(k, orig);
      const double numeric = (up - down) / 2e-5;
      const double scale = std::max(std::abs(analytic[k]), std::abs(numeric));
      if (scale < 1e-10) continue;
      worst = std::max(worst, std::abs(analytic[k] - numeric) / scale);
      ++compared;
    }
  }
  return {worst <= 1e-5, std::to_string(pairs) + " pairs, " + std::to_string(compared) +
                             " partials, worst relative error " + sci(worst)};
}

// 4 -------------------------------------------------------------------------
Outcome hypergeometric_oracle() {
  std::size_t cases = 0;
  for (unsigned n = 1; n <= 12; ++n) {
    for (unsigned k = 0; k <= n; ++k) {
      for (unsigned d = 0; d <= n; ++d) {
        std::vector<std::uint64_t> at(n + 2, 0);  // subsets by marked count
        std::uint64_t total = 0;
        for (std::uint32_t s = 0; s < (1u << n); ++s) {
          if (unsigned(std::popcount(s)) != d) continue;
          ++total;
          ++at[std::popcount(s & ((1u << k) - 1u))];
        }
        std::uint64_t tail = 0;
        for (int t = int(std::min(k, d)) + 1; t >= 0; --t) {
          tail += at[std::size_t(t)];
          const double expected = double(tail) / double(total);
          ++cases;
          if (hypergeometric_tail(n, k, d, std::uint64_t(t)) != expected) {
            return {false, "mismatch at (" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(d) +
                               "," + std::to_string(t) + ")"};
          }
        }
      }
    }
  }
  const double v = hypergeometric_tail(10, 5, 5, 5);
  return {v == 1.0 / 252.0, std::to_string(cases) + " exact matches; tail(10,5,5,5) = " + sci(v) + " (1/252)" +
                                "; tail(117,60,60,33) = " + fmt(hypergeometric_tail(117, 60, 60, 33))};
}

// 5 -------------------------------------------------------------------------
Outcome calibration_targets() {
  std::vector<double> indiv, maj;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = generate_panel(calibrated(seed)).matrix;
    indiv.push_back(mean_of(individual_accuracies(m)));
    maj.push_back(
        cross_validate(m, Scope::each_emotion(), MajorityMethod{}, CvSpec::leave_one_out(1, seed)).mean_accuracy);
  }
  const double a = mean_of(indiv), b = mean_of(maj);
  return {std::abs(a - 0.63) <= 0.02 && b >= 0.75 && b <= 0.85,
          "20 seeds: mean individual accuracy " + fmt(a) + " (target 0.63 +/- 0.02), majority LOOCV " + fmt(b) +
              " (target [0.75, 0.85])"};
}

// 6 -------------------------------------------------------------------------
Outcome method_ordering() {
  const std::vector<double> ratios{0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
  std::vector<double> mlp, maj;
  std::vector<std::vector<double>> elite(ratios.size());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = generate_panel(calibrated(seed)).matrix;
    const auto cv = CvSpec::leave_one_out(1, seed);
    maj.push_back(cross_validate(m, Scope::each_emotion(), MajorityMethod{}, cv).mean_accuracy);
    const auto sweep = elite_ratio_sweep(m, Scope::each_emotion(), ratios, cv, {});
    for (std::size_t r = 0; r < ratios.size(); ++r) elite[r].push_back(sweep.curve[r].mean);
    MlpMethod method;
    method.hyperparams.seed = seed;
    mlp.push_back(cross_validate(m, Scope::each_emotion(), method, cv).mean_accuracy);
  }
  std::size_t best = 0;
  for (std::size_t r = 1; r < ratios.size(); ++r) {
    if (mean_of(elite[r]) > mean_of(elite[best])) best = r;
  }
  const double a = mean_of(mlp), b = mean_of(elite[best]), c = mean_of(maj);
  return {a >= b && b >= c, "20 seeds, per-emotion LOOCV: mlp " + fmt(a) + " >= best elite (ratio " +
                                fmt(ratios[best], 2) + ") " + fmt(b) + " >= majority " + fmt(c)};
}

// 7 -------------------------------------------------------------------------
Outcome subset_saturation() {
  const std::vector<std::size_t> sizes{10, 20, 30, 60, 117};
  std::vector<std::vector<double>> per_seed(sizes.size());
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = generate_panel(calibrated(seed)).matrix;
    MlpMethod method;
    method.hyperparams.seed = seed;
    const auto r = subset_accuracy_curve(m, Scope::each_emotion(), sizes, 4, method, seed);
    for (std::size_t k = 0; k < sizes.size(); ++k) per_seed[k].push_back(r.curve[k].mean);
  }
  std::vector<double> mean(sizes.size()), se(sizes.size());
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    mean[k] = mean_of(per_seed[k]);
    se[k] = sd_of(per_seed[k]) / std::sqrt(double(per_seed[k].size()));
  }
  bool monotone = true;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    const double pooled = std::sqrt(se[k] * se[k] + se[k - 1] * se[k - 1]);
    monotone = monotone && mean[k] >= mean[k - 1] - 2.0 * pooled;
  }
  const double gap = std::abs(mean[4] - mean[2]);
  std::string curve;
  for (std::size_t k = 0; k < sizes.size(); ++k) curve += (k ? ", " : "") + std::to_string(sizes[k]) + ":" + fmt(mean[k]);
  return {gap <= 0.02 && monotone, "5 seeds x 4 subsets, per-emotion LOOCV mlp: " + curve + "; |acc(30) - acc(117)| = " +
                                       fmt(gap) + (monotone ? ", non-decreasing within 2 SE" : ", NOT monotone")};
}

// 8 -------------------------------------------------------------------------
Outcome transfer_symmetry() {
  std::array<std::array<double, 4>, 4> sum{};
  std::vector<double> offdiag_means;
  const int seeds = 20;
  for (std::uint64_t seed = 1; seed <= std::uint64_t(seeds); ++seed) {
    const auto m = generate_panel(calibrated(seed)).matrix;
    MlpMethod method;
    method.hyperparams.seed = seed;
    const auto grid = transfer_matrix(m, method, CvSpec::k_fold(5, 1, seed));
    offdiag_means.push_back(grid.off_diagonal_mean());
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) sum[a][b] += grid.accuracy[a][b];
    }
  }
  double lo = 1.0, hi = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      if (a == b) continue;
      const double v = sum[a][b] / seeds;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const double mean = mean_of(offdiag_means);
  return {hi - lo < 0.05 && mean >= 0.85, "20 seeds, mlp: off-diagonal mean " + fmt(mean) + ", cells in [" + fmt(lo) +
                                              ", " + fmt(hi) + "], max pairwise difference " + fmt(hi - lo)};
}

// 9 -------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CROWDAGG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  const auto root = fs::temp_directory_path() / "crowdagg_acceptance_cli";
  const auto data = root / "data";
  const auto out = root / "out";
  const auto model = root / "model";
  const std::string cfg = std::string(CROWDAGG_CONFIG_DIR) + "/default_panel.cfg";
  const std::string src = " --data " + data.string() + " --seed 7 --out " + out.string();
  const std::vector<std::string> commands{
      "generate --config " + cfg + " --seed 7 --out " + data.string(),
      "evaluate --method mlp --epochs 300 --emotion each --folds 5" + src,
      "evaluate --method elite --sweep 0.02 0.05 0.1 0.5 --emotion each --loo" + src,
      "evaluate --method majority --tie-break half --folds 4 --repeats 3" + src,
      "transfer --method mlp --epochs 300 --folds 5" + src,
      "fold-curve --method mlp --epochs 200 --emotion anger --fold-counts 2 5 10 20 --repeats 2" + src,
      "subset-curve --method elite --emotion each --sizes 10 30 117 --repeats 3" + src,
      "elite-overlap --top-n 5 10 20 30 60 --permutations 50" + src,
      "weight-overlap --epochs 300 --emotion smile --top-n 10 30 60" + src,
      "train --epochs 300 --emotion fear --model fear.txt --data " + data.string() + " --seed 7 --out " +
          model.string(),
      "predict --model " + (model / "fear.txt").string() + " --emotion each" + src,
  };
  std::vector<std::map<std::string, std::string>> runs;
  for (int pass = 0; pass < 2; ++pass) {
    fs::remove_all(root);
    for (const auto& c : commands) {
      if (const int rc = run_cli(c); rc != 0) return {false, "exit " + std::to_string(rc) + " from: " + c};
    }
    runs.push_back(snapshot(root));
  }
  if (runs[0].size() != runs[1].size()) return {false, "different file sets between runs"};
  for (const auto& [name, text] : runs[0]) {
    const auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != text) return {false, "differs between runs: " + name};
  }
  fs::remove_all(root);
  return {true, std::to_string(commands.size()) + " commands covering all 9 subcommands, " +
                    std::to_string(runs[0].size()) + " files byte-identical across two runs"};
}

// 10 ------------------------------------------------------------------------
Outcome leakage_audit() {
  PanelConfig cfg = calibrated(3);
  cfg.participants = 40;
  const auto m = generate_panel(cfg).matrix;
  MlpMethod mlp;
  mlp.hyperparams.epochs = 100;
  const std::vector<Method> methods{MajorityMethod{}, EliteMethod{0.1, {}}, mlp};
  const EvalOptions audit{true, 0};
  std::size_t fits = 0, leaks = 0, harnesses = 0;
  const auto add = [&](std::size_t f, std::size_t l) {
    fits += f;
    leaks += l;
    ++harnesses;
  };
  for (const auto& method : methods) {
    for (const auto& scope : {Scope::pooled(), Scope::each_emotion(), Scope::only(Emotion::Happiness)}) {
      const auto r = cross_validate(m, scope, method, CvSpec::k_fold(5, 2, 1), audit);
      add(r.audited_fits, r.leaked_reads);
    }
    const auto loo = cross_validate(m, Scope::each_emotion(), method, CvSpec::leave_one_out(), audit);
    add(loo.audited_fits, loo.leaked_reads);
    const auto comb = combined_training_eval(m, method, CvSpec::leave_one_out(), audit);
    add(comb.audited_fits, comb.leaked_reads);
    const std::vector<std::size_t> ks{2, 5, 20};
    const auto fc = fold_count_curve(m, Scope::each_emotion(), method, ks, 2, 1, audit);
    add(fc.audited_fits, fc.leaked_reads);
    const std::vector<std::size_t> sizes{10, 40};
    const auto sc = subset_accuracy_curve(m, Scope::only(Emotion::Fear), sizes, 2, method, 1, audit);
    add(sc.audited_fits, sc.leaked_reads);
    const auto grid = transfer_matrix(m, method, CvSpec::k_fold(5), audit);
    add(grid.audited_fits, grid.leaked_reads);
  }
  const std::vector<double> ratios{0.05, 0.5, 1.0};
  const auto sweep = elite_ratio_sweep(m, Scope::each_emotion(), ratios, CvSpec::leave_one_out(), {}, audit);
  add(sweep.audited_fits, sweep.leaked_reads);

  // Control: a fit whose training list contains the test stimulus is caught.
  AccessAudit control;
  const std::vector<std::size_t> test{0};
  const auto all = m.stimulus_indices();
  fit_and_score(m, EliteMethod{0.1, {}}, all, test, 1, &control);
  const auto reads = control.accessed();
  const bool caught = std::count(reads.begin(), reads.end(), std::size_t{0}) > 0;

  return {leaks == 0 && fits > 0 && caught,
          std::to_string(harnesses) + " harness runs, " + std::to_string(fits) + " audited fits, " +
              std::to_string(leaks) + " test-stimulus reads; leaky control " + (caught ? "detected" : "MISSED")};
}

}  // namespace

int main() {
  std::printf("kernels: %s\n", std::string(kernels::active().name).c_str());
  criterion(1, "dummy-dataset reproduction", 10, dummy_reproduction);
  criterion(2, "aggregation ordering on dummy data", 0, dummy_ordering);
  criterion(3, "gradient check", 5, gradient_check);
  criterion(4, "hypergeometric oracle", 5, hypergeometric_oracle);
  criterion(5, "calibration targets", 120, calibration_targets);
  criterion(6, "method ordering on calibrated panels", 600, method_ordering);
  criterion(7, "subset-size saturation", 0, subset_saturation);
  criterion(8, "transfer symmetry and strength", 0, transfer_symmetry);
  criterion(9, "CLI determinism", 0, cli_determinism);
  criterion(10, "no-leakage audit", 0, leakage_audit);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
