#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/mlp.hpp"
#include "crowdagg/rng.hpp"

namespace crowdagg {
namespace {

std::vector<double> random_input(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = double(rng.below(2));
  return x;
}

// Central finite differences of the per-sample loss, one parameter at a time.
std::vector<double> numeric_gradient(MlpModel model, std::span<const double> x, std::uint8_t y, double step) {
  std::vector<double> g(model.parameter_count());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double orig = model.parameter(k);
    model.set_parameter(k, orig + step);
    const double up = model.loss(x, y);
    model.set_parameter(k, orig - step);
    const double down = model.loss(x, y);
    model.set_parameter(k, orig);
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

std::vector<double> flatten(const MlpGradient& g) {
  std::vector<double> out = g.input_weights;
  out.insert(out.end(), g.hidden_biases.begin(), g.hidden_biases.end());
  out.insert(out.end(), g.output_weights.begin(), g.output_weights.end());
  out.push_back(g.output_bias);
  return out;
}

TEST(MlpGradient, MatchesCentralDifferences) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    MlpHyperparams hp;
    hp.hidden_units = 1 + rng.below(6);
    const std::size_t inputs = 1 + rng.below(12);
    MlpModel model(inputs, hp);
    model.randomize(rng, 1.0);
    const auto x = random_input(rng, inputs);
    const auto y = static_cast<std::uint8_t>(rng.below(2));
    const auto analytic = flatten(model.gradient(x, y));
    const auto numeric = numeric_gradient(model, x, y, 1e-5);
    ASSERT_EQ(analytic.size(), numeric.size());
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      const double scale = std::max(std::abs(analytic[k]), std::abs(numeric[k]));
      if (scale < 1e-10) continue;  // both zero, e.g. weights of a 0 input
      const double rel = std::abs(analytic[k] - numeric[k]) / scale;
      worst = std::max(worst, rel);
      EXPECT_LT(rel, 1e-5) << "trial " << trial << " parameter " << k;
    }
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(MlpModel, ZeroParametersPredictOneHalf) {
  MlpModel model(5, {});
  EXPECT_EQ(model.predict(std::vector<std::uint8_t>{1, 0, 1, 1, 0}), 0.5);
  EXPECT_EQ(model.predict(std::vector<std::uint8_t>{0, 0, 0, 0, 0}), 0.5);
  EXPECT_THROW(model.predict(std::vector<std::uint8_t>{1, 0}), DomainError);
}

TEST(MlpModel, ZeroOutputWeightsGiveZeroEffectiveWeights) {
  Rng rng(1);
  MlpModel model(6, {});
  model.randomize(rng, 0.5);
  for (std::size_t j = 0; j < model.hidden(); ++j) model.set_output_weight(j, 0.0);
  for (const auto w : effective_weights(model)) EXPECT_EQ(w, 0.0);
}

TEST(MlpHyperparams, Validation) {
  MlpHyperparams hp;
  hp.hidden_units = 0;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = {};
  hp.epochs = 0;
  EXPECT_THROW(hp.validate(), ConfigError);
  hp = {};
  hp.learning_rate = 0.0;
  EXPECT_THROW(hp.validate(), ConfigError);
}

TEST(TrainMlp, DummyPanelSeparatesAndSignsWeights) {
  const auto m = dummy_panel(3, 7, 20, 17);
  std::vector<std::size_t> train(19);
  std::iota(train.begin(), train.end(), std::size_t{0});
  MlpHyperparams hp;
  hp.seed = 3;
  const auto model = train_mlp(m, train, hp);
  EXPECT_TRUE(model.all_finite());
  EXPECT_LT(model.final_loss(), model.initial_loss());
  EXPECT_LT(model.final_loss(), 0.01);
  for (const auto s : train) EXPECT_EQ(model.predict(m.column(s)) >= 0.5, m.truth()[s] == 1);
  EXPECT_EQ(model.predict(m.column(19)) >= 0.5, m.truth()[19] == 1);  // held out

  const auto lin = effective_weights(model);
  const auto grad = effective_weights(model, WeightMode::GradientAveraged, m, train);
  for (std::size_t i = 0; i < 10; ++i) {
    if (i < 3) {
      EXPECT_GT(lin[i], 0.0) << i;
    } else {
      EXPECT_LT(lin[i], 0.0) << i;
    }
    EXPECT_EQ(lin[i] > 0.0, grad[i] > 0.0) << i;
  }
  EXPECT_EQ(model.trained_on().size(), 19u);
  EXPECT_EQ(model.trained_on().front(), m.stimulus(0).id);
}

TEST(TrainMlp, SinglePerfectParticipant) {
  const auto m = dummy_panel(1, 0, 10, 4);
  const auto train = m.stimulus_indices();
  const auto model = train_mlp(m, train, {});
  for (const auto s : train) EXPECT_EQ(model.predict(m.column(s)) >= 0.5, m.truth()[s] == 1);
}

TEST(TrainMlp, DeterministicGivenSeed) {
  PanelConfig cfg;
  cfg.participants = 20;
  const auto m = generate_panel(cfg).matrix;
  const auto train = m.stimulus_indices(Emotion::Anger);
  MlpHyperparams hp;
  hp.epochs = 200;
  hp.seed = 8;
  EXPECT_EQ(train_mlp(m, train, hp), train_mlp(m, train, hp));
  auto other = hp;
  other.seed = 9;
  EXPECT_NE(format_model(train_mlp(m, train, hp)), format_model(train_mlp(m, train, other)));
}

TEST(TrainMlp, Errors) {
  const auto m = dummy_panel(2, 1, 4, 0);
  EXPECT_THROW(train_mlp(m, std::vector<std::size_t>{}, {}), DomainError);
  MlpHyperparams hp;
  hp.learning_rate = 1e308;  // output logit overflows after the first updates
  hp.epochs = 5;
  EXPECT_THROW(train_mlp(m, m.stimulus_indices(), hp), TrainingDivergence);
}

// Permuting participants and the network inputs together leaves predictions unchanged.
TEST(MlpModel, ParticipantPermutationInvariance) {
  Rng rng(5);
  const std::size_t p = 9;
  MlpModel model(p, {});
  model.randomize(rng, 1.0);
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span(perm));
  MlpModel permuted = model;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < model.hidden(); ++j) permuted.set_input_weight(i, j, model.input_weight(perm[i], j));
  }
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> col(p), permuted_col(p);
    for (auto& v : col) v = static_cast<std::uint8_t>(rng.below(2));
    for (std::size_t i = 0; i < p; ++i) permuted_col[i] = col[perm[i]];
    EXPECT_NEAR(model.predict(col), permuted.predict(permuted_col), 1e-14);
  }
}

// Complemented judgments and labels with negated initial weights give
// complementary classifications.
TEST(TrainMlp, LabelFlipSymmetry) {
  PanelConfig cfg;
  cfg.participants = 25;
  cfg.seed = 12;
  const auto m = generate_panel(cfg).matrix;
  const auto flipped = m.complemented();
  const auto train = m.stimulus_indices(Emotion::Fear);
  const auto test = m.stimulus_indices(Emotion::Anger);
  MlpHyperparams hp;
  hp.epochs = 300;
  hp.seed = 4;
  const auto a = train_mlp(m, train, hp);
  const auto b = train_mlp(flipped, train, hp);
  std::size_t agree = 0;
  for (const auto s : test) agree += ((a.predict(m.column(s)) >= 0.5) != (b.predict(flipped.column(s)) >= 0.5)) ? 1 : 0;
  // Not an exact identity (0/1 inputs are not symmetric under negation), so
  // only the bulk of classifications is required to complement.
  EXPECT_GE(agree, test.size() * 9 / 10);
}

TEST(ModelPersistence, RoundTripIsValueExact) {
  const auto m = dummy_panel(3, 7, 20, 2);
  MlpHyperparams hp;
  hp.epochs = 50;
  hp.learning_rate = 0.1 + 0.2;
  hp.seed = 77;
  const auto model = train_mlp(m, m.stimulus_indices(), hp);
  const auto text = format_model(model);
  const auto back = parse_model(text);
  EXPECT_EQ(back, model);
  EXPECT_EQ(format_model(back), text);

  const auto path = std::filesystem::temp_directory_path() / "crowdagg_model_test.txt";
  save_model(model, path);
  EXPECT_EQ(load_model(path), model);
  std::filesystem::remove(path);

  EXPECT_THROW(parse_model("crowdagg-mlp 2\n"), ParseError);
  EXPECT_THROW(parse_model(text.substr(0, text.size() / 2)), ParseError);
}

}  // namespace
}  // namespace crowdagg
