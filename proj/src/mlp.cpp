#include "crowdagg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/kernels.hpp"

namespace crowdagg {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Binary cross-entropy of logistic(z) against y, without forming log(p).
double bce_from_logit(double z, std::uint8_t y) {
  return std::max(z, 0.0) - z * double(y) + std::log1p(std::exp(-std::abs(z)));
}

std::vector<double> to_input(std::span<const std::uint8_t> column) {
  std::vector<double> x(column.size());
  std::transform(column.begin(), column.end(), x.begin(), [](std::uint8_t v) { return double(v); });
  return x;
}

}  // namespace

void MlpHyperparams::validate() const {
  if (hidden_units == 0) throw ConfigError("hidden_units must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (!(init_range >= 0.0) || !std::isfinite(init_range)) throw ConfigError("init_range must be >= 0");
}

MlpModel::MlpModel(std::size_t participants, MlpHyperparams hyperparams)
    : inputs_(participants), hp_(hyperparams) {
  hp_.validate();
  if (participants == 0) throw DomainError("network needs at least one input");
  unit_weights_.assign(inputs_ * hp_.hidden_units, 0.0);
  hidden_biases_.assign(hp_.hidden_units, 0.0);
  output_weights_.assign(hp_.hidden_units, 0.0);
}

void MlpModel::randomize(Rng& rng, double range) {
  // Participant-major order so the stream does not depend on storage layout.
  for (std::size_t i = 0; i < inputs_; ++i) {
    for (std::size_t j = 0; j < hidden(); ++j) set_input_weight(i, j, rng.uniform(-range, range));
  }
  for (auto& b : hidden_biases_) b = rng.uniform(-range, range);
  for (auto& w : output_weights_) w = rng.uniform(-range, range);
  output_bias_ = rng.uniform(-range, range);
}

double MlpModel::parameter(std::size_t k) const {
  const std::size_t h = hidden();
  if (k < inputs_ * h) return input_weight(k / h, k % h);
  k -= inputs_ * h;
  if (k < h) return hidden_biases_[k];
  k -= h;
  if (k < h) return output_weights_[k];
  if (k == h) return output_bias_;
  throw DomainError("parameter index out of range");
}

void MlpModel::set_parameter(std::size_t k, double v) {
  const std::size_t h = hidden();
  if (k < inputs_ * h) return set_input_weight(k / h, k % h, v);
  k -= inputs_ * h;
  if (k < h) {
    hidden_biases_[k] = v;
    return;
  }
  k -= h;
  if (k < h) {
    output_weights_[k] = v;
    return;
  }
  if (k == h) {
    output_bias_ = v;
    return;
  }
  throw DomainError("parameter index out of range");
}

void MlpModel::forward(const double* x, Pass& pass) const {
  const auto& kern = kernels::active();
  const std::size_t h = hidden();
  pass.hidden.resize(h);
  double z = output_bias_;
  for (std::size_t j = 0; j < h; ++j) {
    const double a = logistic(hidden_biases_[j] + kern.dot(unit_weights_.data() + j * inputs_, x, inputs_));
    pass.hidden[j] = a;
    z += output_weights_[j] * a;
  }
  pass.logit = z;
  pass.output = logistic(z);
}

double MlpModel::predict(std::span<const double> input) const {
  if (input.size() != inputs_) {
    throw DomainError("input has " + std::to_string(input.size()) + " judgments, network expects " +
                      std::to_string(inputs_));
  }
  Pass pass;
  forward(input.data(), pass);
  return pass.output;
}

double MlpModel::predict(std::span<const std::uint8_t> column) const {
  if (column.size() != inputs_) {
    throw DomainError("column has " + std::to_string(column.size()) + " judgments, network expects " +
                      std::to_string(inputs_));
  }
  const auto x = to_input(column);
  return predict(std::span<const double>(x));
}

double MlpModel::loss(std::span<const double> input, std::uint8_t target) const {
  if (input.size() != inputs_) throw DomainError("input length does not match the network");
  Pass pass;
  forward(input.data(), pass);
  return bce_from_logit(pass.logit, target);
}

MlpGradient MlpModel::gradient(std::span<const double> input, std::uint8_t target) const {
  if (input.size() != inputs_) throw DomainError("input length does not match the network");
  const std::size_t h = hidden();
  Pass pass;
  forward(input.data(), pass);

  MlpGradient g;
  g.loss = bce_from_logit(pass.logit, target);
  const double d_out = pass.output - double(target);
  g.output_bias = d_out;
  g.output_weights.resize(h);
  g.hidden_biases.resize(h);
  g.input_weights.assign(inputs_ * h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    g.output_weights[j] = d_out * pass.hidden[j];
    const double d_hidden = d_out * output_weights_[j] * pass.hidden[j] * (1.0 - pass.hidden[j]);
    g.hidden_biases[j] = d_hidden;
    for (std::size_t i = 0; i < inputs_; ++i) g.input_weights[i * h + j] = d_hidden * input[i];
  }
  return g;
}

bool MlpModel::all_finite() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(unit_weights_.begin(), unit_weights_.end(), finite) &&
         std::all_of(hidden_biases_.begin(), hidden_biases_.end(), finite) &&
         std::all_of(output_weights_.begin(), output_weights_.end(), finite) && std::isfinite(output_bias_);
}

MlpModel train_mlp(const TrainingSet& training, const MlpHyperparams& hp) {
  hp.validate();
  if (training.empty()) throw DomainError("training set is empty");
  const std::size_t p = training.participants();
  const std::size_t n = training.size();
  const std::size_t h = hp.hidden_units;

  std::vector<double> inputs(n * p);
  std::vector<std::uint8_t> targets(n);
  MlpModel model(p, hp);
  model.trained_on_.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto col = training.column(k);
    std::transform(col.begin(), col.end(), inputs.begin() + static_cast<std::ptrdiff_t>(k * p),
                   [](std::uint8_t v) { return double(v); });
    targets[k] = training.truth(k);
    model.trained_on_.push_back(training.stimulus_id(k));
  }

  Rng rng(hp.seed);
  model.randomize(rng, hp.init_range);

  const auto mean_loss = [&] {
    MlpModel::Pass pass;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      model.forward(inputs.data() + k * p, pass);
      total += bce_from_logit(pass.logit, targets[k]);
    }
    return total / double(n);
  };
  model.initial_loss_ = mean_loss();

  const auto& kern = kernels::active();
  const double lr = hp.learning_rate;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  MlpModel::Pass pass;
  std::vector<double> d_hidden(h);

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (const auto k : order) {
      const double* x = inputs.data() + k * p;
      model.forward(x, pass);
      epoch_loss += bce_from_logit(pass.logit, targets[k]);

      const double d_out = pass.output - double(targets[k]);
      for (std::size_t j = 0; j < h; ++j) {
        const double a = pass.hidden[j];
        d_hidden[j] = d_out * model.output_weights_[j] * a * (1.0 - a);
      }
      for (std::size_t j = 0; j < h; ++j) {
        model.output_weights_[j] -= lr * d_out * pass.hidden[j];
        model.hidden_biases_[j] -= lr * d_hidden[j];
        kern.axpy(-lr * d_hidden[j], x, model.unit_weights_.data() + j * p, p);
      }
      model.output_bias_ -= lr * d_out;
    }
    if (!std::isfinite(epoch_loss)) throw TrainingDivergence(epoch + 1);
  }

  model.final_loss_ = mean_loss();
  if (!std::isfinite(model.final_loss_) || !model.all_finite()) throw TrainingDivergence(hp.epochs);
  return model;
}

MlpModel train_mlp(const ResponseMatrix& matrix, std::span<const std::size_t> training_stimuli,
                   const MlpHyperparams& hp) {
  return train_mlp(TrainingSet(matrix, training_stimuli), hp);
}

double predict_mlp(const MlpModel& model, std::span<const std::uint8_t> column) { return model.predict(column); }

std::vector<double> effective_weights(const MlpModel& model) {
  std::vector<double> w(model.inputs(), 0.0);
  for (std::size_t i = 0; i < model.inputs(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < model.hidden(); ++j) sum += model.output_weight(j) * model.input_weight(i, j);
    w[i] = sum;
  }
  return w;
}

std::vector<double> effective_weights(const MlpModel& model, WeightMode mode, const ResponseMatrix& matrix,
                                      std::span<const std::size_t> stimuli) {
  if (mode == WeightMode::Linearized) return effective_weights(model);
  if (stimuli.empty()) throw DomainError("gradient-averaged weights need at least one column");
  if (matrix.participants() != model.inputs()) throw DomainError("matrix and network disagree on participant count");

  const std::size_t h = model.hidden();
  std::vector<double> w(model.inputs(), 0.0);
  std::vector<double> hidden(h);
  for (const auto s : stimuli) {
    const auto x = to_input(matrix.column(s));
    double z = model.output_bias();
    for (std::size_t j = 0; j < h; ++j) {
      double a = model.hidden_bias(j);
      for (std::size_t i = 0; i < x.size(); ++i) a += model.input_weight(i, j) * x[i];
      hidden[j] = logistic(a);
      z += model.output_weight(j) * hidden[j];
    }
    const double out = logistic(z);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < h; ++j) {
        d += model.output_weight(j) * hidden[j] * (1.0 - hidden[j]) * model.input_weight(i, j);
      }
      w[i] += out * (1.0 - out) * d;
    }
  }
  for (auto& v : w) v /= double(stimuli.size());
  return w;
}

}  // namespace crowdagg
