// crowdagg command-line front end.
//
// Exit codes:
//   0  all requested outputs written
//   1  usage error (bad flag or flag combination)
//   2  configuration or input data error
//   3  evaluation error (harness rejected the data or training diverged)
//   4  an output file could not be written

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "crowdagg/error.hpp"
#include "crowdagg/evaluation.hpp"
#include "crowdagg/hypergeometric.hpp"
#include "crowdagg/mlp.hpp"
#include "crowdagg/panel.hpp"
#include "crowdagg/report.hpp"

namespace fs = std::filesystem;
using namespace crowdagg;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kHarness = 3, kWrite = 4 };

struct UsageError : Error {
  using Error::Error;
};
struct WriteError : Error {
  using Error::Error;
};

struct DataFlags {
  std::string data_dir;
  std::string responses;
  std::string labels;
  std::string config;
  std::string preset;
};

struct MethodFlags {
  std::string method = "mlp";
  double ratio = 0.05;
  std::string tie_break = "acted";
  std::size_t hidden = 10;
  std::size_t epochs = 5000;
  double learning_rate = 0.01;
};

struct CvFlags {
  std::size_t folds = 0;
  bool loo = false;
  std::size_t repeats = 1;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string emotion = "all";
  bool audit = false;
  std::size_t threads = 0;

  std::uint64_t master_seed() const { return seed.value_or(1); }
};

// Collects what a command read and wrote; written last as the manifest.
class Run {
 public:
  Run(std::string command, const Common& common, std::vector<std::string> argv)
      : command_(std::move(command)), out_(common.out), seed_(common.master_seed()), argv_(std::move(argv)) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void setting(const std::string& key, const std::string& value) { config_[key] = value; }

  void write(const std::string& name, const std::string& contents) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    const fs::path path = out_ / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw WriteError("cannot open '" + path.string() + "' for writing");
    f << contents;
    f.close();
    if (!f) throw WriteError("failed writing '" + path.string() + "'");
    artifacts_.push_back(name);
  }

  void finish(const std::string& manifest_name) {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["argv"] = argv_;
    j["inputs"] = inputs_;
    j["config"] = config_;
    j["seed"] = seed_;
    j["artifacts"] = artifacts_;
    j["version"] = CROWDAGG_VERSION;
    const auto text = j.dump(2) + "\n";
    write(manifest_name, text);
  }

 private:
  std::string command_;
  fs::path out_;
  std::uint64_t seed_;
  std::vector<std::string> argv_;
  std::vector<std::string> inputs_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::vector<std::string> artifacts_;
};

std::string printable(double v) {
  auto s = format_real(v);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

PanelConfig config_from(const DataFlags& d, const Common& c, Run& run) {
  PanelConfig cfg;
  if (!d.config.empty()) {
    if (!fs::exists(d.config)) throw ConfigError("config file not found: " + d.config);
    cfg = load_panel_config(d.config);
    run.input(d.config);
  } else if (d.preset != "default" && !d.preset.empty()) {
    throw UsageError("unknown preset '" + d.preset + "'");
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

ResponseMatrix load_data(const DataFlags& d, const Common& c, Run& run) {
  const int sources = int(!d.data_dir.empty()) + int(!d.responses.empty() || !d.labels.empty()) +
                      int(!d.config.empty()) + int(!d.preset.empty());
  if (sources != 1) throw UsageError("give exactly one of --data, --responses/--labels, --config, --preset");
  if (!d.data_dir.empty()) {
    const auto r = (fs::path(d.data_dir) / "responses.csv").string();
    const auto l = (fs::path(d.data_dir) / "labels.csv").string();
    run.input(r);
    run.input(l);
    return load_matrix(r, l);
  }
  if (!d.responses.empty() || !d.labels.empty()) {
    if (d.responses.empty() || d.labels.empty()) throw UsageError("--responses and --labels go together");
    run.input(d.responses);
    run.input(d.labels);
    return load_matrix(d.responses, d.labels);
  }
  if (d.preset == "dummy") {
    run.setting("preset", "dummy");
    return dummy_panel(3, 7, 20, c.master_seed());
  }
  const auto cfg = config_from(d, c, run);
  run.setting("panel", format_panel_config(cfg));
  return generate_panel(cfg).matrix;
}

Scope parse_scope(const std::string& s) {
  if (s == "all") return Scope::pooled();
  if (s == "each") return Scope::each_emotion();
  if (const auto e = parse_emotion(s)) return Scope::only(*e);
  throw UsageError("--emotion must be all, each, or an emotion name (got '" + s + "')");
}

MlpHyperparams mlp_params(const MethodFlags& m, std::uint64_t seed) {
  MlpHyperparams hp;
  hp.hidden_units = m.hidden;
  hp.epochs = m.epochs;
  hp.learning_rate = m.learning_rate;
  hp.seed = seed;
  hp.validate();
  return hp;
}

Method make_method(const MethodFlags& m, std::uint64_t seed) {
  const auto tb = parse_tie_break(m.tie_break);
  if (!tb) throw UsageError("--tie-break must be acted, genuine or half");
  if (m.method == "majority") return MajorityMethod{{*tb}};
  if (m.method == "elite") return EliteMethod{m.ratio, {*tb}};
  if (m.method == "mlp") return MlpMethod{mlp_params(m, seed)};
  throw UsageError("--method must be majority, elite or mlp");
}

CvSpec make_cv(const CvFlags& f, std::uint64_t seed) {
  if (f.loo && f.folds != 0) throw UsageError("--folds and --loo are exclusive");
  if (f.repeats == 0) throw UsageError("--repeats must be >= 1");
  return CvSpec{f.folds, f.repeats, seed};
}

void record_common(Run& run, const Common& c, const CvFlags* cv, const MethodFlags* m) {
  run.setting("emotion", c.emotion);
  run.setting("audit", c.audit ? "true" : "false");
  if (cv) {
    run.setting("folds", cv->folds == 0 ? "loo" : std::to_string(cv->folds));
    run.setting("repeats", std::to_string(cv->repeats));
  }
  if (m) {
    run.setting("method", m->method);
    if (m->method == "elite") run.setting("ratio", format_real(m->ratio));
    if (m->method != "mlp") run.setting("tie_break", m->tie_break);
    if (m->method == "mlp") {
      run.setting("hidden", std::to_string(m->hidden));
      run.setting("epochs", std::to_string(m->epochs));
      run.setting("learning_rate", format_real(m->learning_rate));
    }
  }
}

void write_report(Run& run, const ExperimentReport& r, std::uint64_t seed) {
  const auto stem = report_stem(r.experiment, r.method, r.scope, seed);
  run.write(stem + "_folds.csv", folds_csv(r));
  if (!r.curve_x.empty()) run.write(stem + "_curve.csv", curve_csv(r));
  run.write(stem + "_summary.json", summary_json(r));
  run.finish(stem + "_manifest.json");
}

void add_data_flags(CLI::App* cmd, DataFlags& d) {
  cmd->add_option("--data", d.data_dir, "Directory holding responses.csv and labels.csv");
  cmd->add_option("--responses", d.responses, "Responses CSV (participant_id,<stimulus ids...>)");
  cmd->add_option("--labels", d.labels, "Labels CSV (stimulus_id,emotion,truth)");
  cmd->add_option("--config", d.config, "Panel config; simulate the panel instead of reading CSVs");
  cmd->add_option("--preset", d.preset, "Built-in panel: default (calibrated) or dummy (3 right, 7 wrong, 20 stimuli)")
      ->check(CLI::IsMember({"default", "dummy"}));
}

void add_common_flags(CLI::App* cmd, Common& c, bool with_emotion = true) {
  cmd->add_option("--seed", c.seed, "Master seed; every internal seed derives from it (default 1)");
  cmd->add_option("--out", c.out, "Output directory (created if missing)");
  if (with_emotion) cmd->add_option("--emotion", c.emotion, "Stimulus scope: all, each, anger, smile, fear or happiness");
  cmd->add_flag("--audit", c.audit, "Record stimulus reads during fitting and report test-stimulus leaks");
  cmd->add_option("--threads", c.threads, "Worker threads for independent fits (0 = all cores)");
}

void add_method_flags(CLI::App* cmd, MethodFlags& m) {
  cmd->add_option("--method", m.method, "Aggregator: majority, elite or mlp")
      ->check(CLI::IsMember({"majority", "elite", "mlp"}));
  cmd->add_option("--ratio", m.ratio, "Elite ratio in (0, 1]");
  cmd->add_option("--tie-break", m.tie_break, "Vote tie rule: acted, genuine or half");
  cmd->add_option("--hidden", m.hidden, "MLP hidden units");
  cmd->add_option("--epochs", m.epochs, "MLP training epochs");
  cmd->add_option("--lr", m.learning_rate, "MLP learning rate");
}

void add_cv_flags(CLI::App* cmd, CvFlags& f) {
  cmd->add_option("--folds", f.folds, "k-fold cross-validation with k folds");
  cmd->add_flag("--loo", f.loo, "Leave-one-stimulus-out cross-validation (default)");
  cmd->add_option("--repeats", f.repeats, "Repeated fold assignments");
}

std::vector<std::size_t> default_sizes(std::size_t participants) {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 10; s < participants; s += 10) sizes.push_back(s);
  sizes.push_back(participants);
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);

  CLI::App app{"Crowd aggregation of binary veracity judgments"};
  app.set_version_flag("--version", std::string(CROWDAGG_VERSION));
  app.require_subcommand(1);

  Common common;
  DataFlags data;
  MethodFlags method;
  CvFlags cv;
  std::vector<double> sweep;
  std::vector<std::size_t> fold_counts{2, 4, 5, 10, 20};
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> top_n;
  std::size_t permutations = 200;
  std::string weight_mode = "linear";
  std::string model_path;
  std::string column;

  auto* gen = app.add_subcommand("generate", "Simulate a panel and write responses, labels and annotator profiles");
  gen->add_option("--config", data.config, "Panel config file");
  gen->add_option("--preset", data.preset, "Built-in panel: default or dummy")
      ->check(CLI::IsMember({"default", "dummy"}));
  add_common_flags(gen, common, false);

  auto* eval = app.add_subcommand("evaluate", "Cross-validate an aggregator; prints mean accuracy");
  add_data_flags(eval, data);
  add_common_flags(eval, common);
  add_method_flags(eval, method);
  add_cv_flags(eval, cv);
  eval->add_option("--sweep", sweep, "Elite ratios to sweep (elite method only); writes a curve");

  auto* transfer = app.add_subcommand("transfer", "Train on one emotion, test on each other; 4x4 grid");
  add_data_flags(transfer, data);
  add_common_flags(transfer, common, false);
  add_method_flags(transfer, method);
  add_cv_flags(transfer, cv);

  auto* fold_curve = app.add_subcommand("fold-curve", "Accuracy against the number of cross-validation folds");
  add_data_flags(fold_curve, data);
  add_common_flags(fold_curve, common);
  add_method_flags(fold_curve, method);
  fold_curve->add_option("--fold-counts", fold_counts, "Fold counts to evaluate");
  fold_curve->add_option("--repeats", cv.repeats, "Repeated fold assignments per count");

  auto* subset_curve = app.add_subcommand("subset-curve", "Accuracy against the number of participants");
  add_data_flags(subset_curve, data);
  add_common_flags(subset_curve, common);
  add_method_flags(subset_curve, method);
  subset_curve->add_option("--sizes", sizes, "Subset sizes (default 10, 20, ... and the full panel)");
  subset_curve->add_option("--repeats", cv.repeats, "Random subsets per size");

  auto* elite_overlap = app.add_subcommand("elite-overlap", "Overlap of each emotion's top participants");
  add_data_flags(elite_overlap, data);
  add_common_flags(elite_overlap, common, false);
  elite_overlap->add_option("--top-n", top_n, "Top-set sizes (default 5 10 20 30 60)");
  elite_overlap->add_option("--permutations", permutations, "Shuffles for the permutation baseline");

  auto* weight_overlap = app.add_subcommand("weight-overlap", "Top participants by MLP weight vs by accuracy");
  add_data_flags(weight_overlap, data);
  add_common_flags(weight_overlap, common);
  add_method_flags(weight_overlap, method);
  weight_overlap->add_option("--top-n", top_n, "Top-set sizes (default 60)");
  weight_overlap->add_option("--weight-mode", weight_mode, "Effective weight: linear or gradient")
      ->check(CLI::IsMember({"linear", "gradient"}));
  weight_overlap->add_option("--model", model_path, "Use a saved model instead of training one");

  auto* train = app.add_subcommand("train", "Train an MLP on the scoped stimuli and save it");
  add_data_flags(train, data);
  add_common_flags(train, common);
  add_method_flags(train, method);
  train->add_option("--model", model_path, "Model file name inside --out (default model.txt)");

  auto* predict = app.add_subcommand("predict", "Score stimuli through a saved model");
  add_data_flags(predict, data);
  add_common_flags(predict, common);
  predict->add_option("--model", model_path, "Saved model file")->required();
  predict->add_option("--column", column, "Single judgment column, e.g. 1,0,1,...; prints the probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const auto seed = common.master_seed();
    EvalOptions options{common.audit, common.threads};

    if (gen->parsed()) {
      Run run("generate", common, args);
      if (data.preset == "dummy") {
        if (!data.config.empty()) throw UsageError("--config and --preset are exclusive");
        const auto m = dummy_panel(3, 7, 20, seed);
        run.setting("preset", "dummy");
        run.write("responses.csv", format_responses_csv(m));
        run.write("labels.csv", format_labels_csv(m));
      } else {
        if (!data.config.empty() && !data.preset.empty()) throw UsageError("--config and --preset are exclusive");
        const auto cfg = config_from(data, common, run);
        run.setting("panel", format_panel_config(cfg));
        const auto panel = generate_panel(cfg);
        run.write("responses.csv", format_responses_csv(panel.matrix));
        run.write("labels.csv", format_labels_csv(panel.matrix));
        run.write("profiles.csv", format_profiles_csv(panel.profiles, panel.matrix.participant_ids()));
      }
      run.finish("manifest.json");
      return kOk;
    }

    if (eval->parsed()) {
      Run run("evaluate", common, args);
      const auto m = load_data(data, common, run);
      const auto scope = parse_scope(common.emotion);
      record_common(run, common, &cv, &method);
      const auto spec = make_cv(cv, seed);
      ExperimentReport r;
      if (!sweep.empty()) {
        if (method.method != "elite") throw UsageError("--sweep needs --method elite");
        const auto tb = parse_tie_break(method.tie_break);
        if (!tb) throw UsageError("--tie-break must be acted, genuine or half");
        r = elite_ratio_sweep(m, scope, sweep, spec, {*tb}, options);
      } else {
        r = cross_validate(m, scope, make_method(method, seed), spec, options);
      }
      write_report(run, r, seed);
      std::cout << printable(r.mean_accuracy) << "\n";
      if (common.audit) std::cerr << "audited fits " << r.audited_fits << ", leaked reads " << r.leaked_reads << "\n";
      return kOk;
    }

    if (transfer->parsed()) {
      Run run("transfer", common, args);
      const auto m = load_data(data, common, run);
      record_common(run, common, &cv, &method);
      const auto grid = transfer_matrix(m, make_method(method, seed), make_cv(cv, seed), options);
      const auto stem = report_stem("transfer", grid.method, "grid", seed);
      run.write(stem + "_long.csv", transfer_csv(grid));
      run.write(stem + "_grid.csv", transfer_grid_csv(grid));
      run.write(stem + "_summary.json", transfer_summary_json(grid));
      run.finish(stem + "_manifest.json");
      std::cout << printable(grid.off_diagonal_mean()) << "\n";
      return kOk;
    }

    if (fold_curve->parsed()) {
      Run run("fold-curve", common, args);
      const auto m = load_data(data, common, run);
      record_common(run, common, &cv, &method);
      if (cv.repeats == 0) throw UsageError("--repeats must be >= 1");
      const auto r = fold_count_curve(m, parse_scope(common.emotion), make_method(method, seed), fold_counts,
                                      cv.repeats, seed, options);
      write_report(run, r, seed);
      std::cout << printable(r.mean_accuracy) << "\n";
      return kOk;
    }

    if (subset_curve->parsed()) {
      Run run("subset-curve", common, args);
      const auto m = load_data(data, common, run);
      record_common(run, common, &cv, &method);
      if (sizes.empty()) sizes = default_sizes(m.participants());
      if (cv.repeats == 0) throw UsageError("--repeats must be >= 1");
      const auto r = subset_accuracy_curve(m, parse_scope(common.emotion), sizes, cv.repeats,
                                           make_method(method, seed), seed, options);
      write_report(run, r, seed);
      std::cout << printable(r.mean_accuracy) << "\n";
      return kOk;
    }

    if (elite_overlap->parsed()) {
      Run run("elite-overlap", common, args);
      const auto m = load_data(data, common, run);
      if (top_n.empty()) top_n = {5, 10, 20, 30, 60};
      std::vector<EliteOverlap> rows;
      nlohmann::ordered_json baseline = nlohmann::ordered_json::array();
      for (const auto n : top_n) {
        if (n == 0 || n > m.participants()) throw DomainError("--top-n must be in [1, participants]");
        rows.push_back(elite_overlap_across_emotions(m, n));
        const auto dist = random_intersection_distribution(m.participants(), n, 4);
        double tail = 0.0;
        for (std::size_t k = rows.back().intersection_count; k < dist.size(); ++k) tail += dist[k];
        baseline.push_back({{"top_n", n},
                            {"intersection_count", rows.back().intersection_count},
                            {"random_tail_probability", std::min(tail, 1.0)},
                            {"permutation_mean_rate",
                             permutation_overlap_baseline(m, n, permutations, derive_seed(seed, {n}))}});
      }
      run.setting("permutations", std::to_string(permutations));
      const auto stem = report_stem("elite_overlap", "accuracy", "emotions", seed);
      run.write(stem + ".csv", elite_overlap_csv(rows, m.participants()));
      run.write(stem + "_jaccard.csv", jaccard_csv(rows));
      nlohmann::ordered_json summary;
      summary["participants"] = m.participants();
      summary["baselines"] = baseline;
      summary["version"] = CROWDAGG_VERSION;
      run.write(stem + "_summary.json", summary.dump(2) + "\n");
      run.finish(stem + "_manifest.json");
      for (const auto& r : rows) std::cout << r.top_n << " " << printable(r.rate) << "\n";
      return kOk;
    }

    if (weight_overlap->parsed()) {
      Run run("weight-overlap", common, args);
      const auto m = load_data(data, common, run);
      record_common(run, common, nullptr, &method);
      run.setting("weight_mode", weight_mode);
      MlpModel model = [&] {
        if (!model_path.empty()) {
          run.input(model_path);
          return load_model(model_path);
        }
        const auto stimuli = parse_scope(common.emotion).groups(m);
        std::vector<std::size_t> train_idx;
        for (const auto& g : stimuli) train_idx.insert(train_idx.end(), g.second.begin(), g.second.end());
        return train_mlp(m, train_idx, mlp_params(method, seed));
      }();
      if (model.inputs() != m.participants()) throw SchemaError("model inputs do not match the panel");
      if (top_n.empty()) top_n = {std::min<std::size_t>(60, m.participants())};
      const auto mode = weight_mode == "gradient" ? WeightMode::GradientAveraged : WeightMode::Linearized;
      std::vector<OverlapResult> rows;
      for (const auto n : top_n) rows.push_back(weight_accuracy_overlap(model, m, n, mode));
      const auto stem = report_stem("weight_overlap", "mlp", common.emotion, seed);
      run.write(stem + ".csv", overlap_csv(rows));
      run.finish(stem + "_manifest.json");
      for (const auto& r : rows) {
        std::cout << r.n << " " << r.overlap_count << " " << printable(r.null_probability) << "\n";
      }
      return kOk;
    }

    if (train->parsed()) {
      Run run("train", common, args);
      const auto m = load_data(data, common, run);
      record_common(run, common, nullptr, &method);
      std::vector<std::size_t> train_idx;
      for (const auto& g : parse_scope(common.emotion).groups(m)) {
        train_idx.insert(train_idx.end(), g.second.begin(), g.second.end());
      }
      const auto model = train_mlp(m, train_idx, mlp_params(method, seed));
      const auto name = model_path.empty() ? std::string("model.txt") : model_path;
      run.write(name, format_model(model));
      run.finish(fs::path(name).stem().string() + "_manifest.json");
      std::cout << printable(model.final_loss()) << "\n";
      return kOk;
    }

    if (predict->parsed()) {
      Run run("predict", common, args);
      run.input(model_path);
      const auto model = load_model(model_path);
      if (!column.empty()) {
        std::vector<std::uint8_t> col;
        for (const auto c : column) {
          if (c == '0' || c == '1') col.push_back(std::uint8_t(c - '0'));
          else if (c != ',' && c != ' ') throw SchemaError("--column takes 0/1 values separated by commas");
        }
        std::cout << printable(model.predict(col)) << "\n";
        return kOk;
      }
      const auto m = load_data(data, common, run);
      if (model.inputs() != m.participants()) throw SchemaError("model inputs do not match the panel");
      std::string csv = "stimulus_id,emotion,probability,prediction,truth\n";
      std::size_t correct = 0, total = 0;
      for (const auto& g : parse_scope(common.emotion).groups(m)) {
        for (const auto s : g.second) {
          const double p = model.predict(m.column(s));
          const int pred = p >= 0.5 ? 1 : 0;
          const auto& st = m.stimulus(s);
          csv += st.id + "," + std::string(to_string(st.emotion)) + "," + format_real(p) + "," +
                 std::to_string(pred) + "," + std::to_string(st.truth) + "\n";
          correct += pred == st.truth ? 1 : 0;
          ++total;
        }
      }
      run.write("predictions.csv", csv);
      run.finish("predictions_manifest.json");
      std::cout << printable(double(correct) / double(total)) << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const WriteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kWrite;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHarness;
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHarness;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kHarness;
  }
  return kUsage;
}
