#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdagg/rng.hpp"
#include "crowdagg/training_set.hpp"

namespace crowdagg {

struct MlpHyperparams {
  std::size_t hidden_units = 10;
  std::size_t epochs = 5000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  // Initial weights and biases are uniform in [-init_range, +init_range].
  double init_range = 0.5;

  void validate() const;  // throws ConfigError

  bool operator==(const MlpHyperparams&) const = default;
};

// Gradient of the binary cross-entropy loss for one sample, laid out like
// the model parameters.
struct MlpGradient {
  double loss = 0.0;
  std::vector<double> input_weights;   // participants x hidden, row-major
  std::vector<double> hidden_biases;
  std::vector<double> output_weights;
  double output_bias = 0.0;
};

// participants -> hidden (logistic) -> 1 (logistic) network. Output is the
// probability that the stimulus is genuine.
class MlpModel {
 public:
  // All parameters zero.
  MlpModel(std::size_t participants, MlpHyperparams hyperparams);

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t hidden() const noexcept { return hp_.hidden_units; }
  const MlpHyperparams& hyperparams() const noexcept { return hp_; }

  double input_weight(std::size_t participant, std::size_t unit) const {
    return unit_weights_[unit * inputs_ + participant];
  }
  void set_input_weight(std::size_t participant, std::size_t unit, double w) {
    unit_weights_[unit * inputs_ + participant] = w;
  }
  double hidden_bias(std::size_t unit) const { return hidden_biases_[unit]; }
  void set_hidden_bias(std::size_t unit, double b) { hidden_biases_[unit] = b; }
  double output_weight(std::size_t unit) const { return output_weights_[unit]; }
  void set_output_weight(std::size_t unit, double w) { output_weights_[unit] = w; }
  double output_bias() const noexcept { return output_bias_; }
  void set_output_bias(double b) { output_bias_ = b; }

  // Fills every parameter uniformly in [-range, range] from rng.
  void randomize(Rng& rng, double range);

  // Total number of scalar parameters and flat access in the order
  // input weights (participant-major), hidden biases, output weights, output bias.
  std::size_t parameter_count() const noexcept { return inputs_ * hidden() + 2 * hidden() + 1; }
  double parameter(std::size_t k) const;
  void set_parameter(std::size_t k, double v);

  // Probability of "genuine". Throws DomainError on a length mismatch.
  double predict(std::span<const std::uint8_t> column) const;
  double predict(std::span<const double> input) const;

  // Per-sample binary cross-entropy and its gradient.
  MlpGradient gradient(std::span<const double> input, std::uint8_t target) const;
  double loss(std::span<const double> input, std::uint8_t target) const;

  // Training record.
  const std::vector<std::string>& trained_on() const noexcept { return trained_on_; }
  double initial_loss() const noexcept { return initial_loss_; }
  double final_loss() const noexcept { return final_loss_; }

  bool all_finite() const;

  bool operator==(const MlpModel&) const = default;

 private:
  friend MlpModel train_mlp(const TrainingSet&, const MlpHyperparams&);
  friend MlpModel parse_model(std::string_view, const std::string&);

  struct Pass {
    std::vector<double> hidden;
    double logit = 0.0;
    double output = 0.0;
  };
  void forward(const double* x, Pass& pass) const;

  std::size_t inputs_;
  MlpHyperparams hp_;
  std::vector<double> unit_weights_;  // hidden x participants (unit-major for contiguous dots)
  std::vector<double> hidden_biases_;
  std::vector<double> output_weights_;
  double output_bias_ = 0.0;
  std::vector<std::string> trained_on_;
  double initial_loss_ = 0.0;
  double final_loss_ = 0.0;
};

// Plain per-sample SGD on binary cross-entropy, reshuffling every epoch.
// Deterministic given (training data, hyperparams) for a fixed kernel
// variant. Throws TrainingDivergence if the loss becomes non-finite.
MlpModel train_mlp(const TrainingSet& training, const MlpHyperparams& hp);
MlpModel train_mlp(const ResponseMatrix& matrix, std::span<const std::size_t> training_stimuli,
                   const MlpHyperparams& hp);

double predict_mlp(const MlpModel& model, std::span<const std::uint8_t> column);

enum class WeightMode : std::uint8_t {
  Linearized,       // sum_j output_weight[j] * input_weight[i][j]
  GradientAveraged  // mean over columns of d output / d input_i
};

std::vector<double> effective_weights(const MlpModel& model);
// Gradient-averaged variant over the given columns (typically the training
// stimuli). Falls back to Linearized when mode says so.
std::vector<double> effective_weights(const MlpModel& model, WeightMode mode, const ResponseMatrix& matrix,
                                      std::span<const std::size_t> stimuli);

// Versioned text persistence; save/load round-trips every value exactly.
std::string format_model(const MlpModel& model);
MlpModel parse_model(std::string_view text, const std::string& source = "<model>");
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace crowdagg
