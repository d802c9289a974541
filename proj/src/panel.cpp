#include "crowdagg/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crowdagg/error.hpp"
#include "crowdagg/kernels.hpp"
#include "crowdagg/rng.hpp"

namespace crowdagg {

std::string_view to_string(Emotion e) noexcept {
  switch (e) {
    case Emotion::Anger: return "anger";
    case Emotion::Smile: return "smile";
    case Emotion::Fear: return "fear";
    case Emotion::Happiness: return "happiness";
  }
  return "unknown";
}

std::optional<Emotion> parse_emotion(std::string_view name) noexcept {
  for (const auto e : kAllEmotions) {
    if (to_string(e) == name) return e;
  }
  return std::nullopt;
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> participant_ids, std::vector<Stimulus> stimuli,
                               std::vector<std::uint8_t> entries)
    : participant_ids_(std::move(participant_ids)), stimuli_(std::move(stimuli)), rows_(std::move(entries)) {
  const std::size_t p = participant_ids_.size();
  const std::size_t s = stimuli_.size();
  if (p == 0 || s == 0) throw SchemaError("response matrix needs at least one participant and one stimulus");
  if (rows_.size() != p * s) {
    throw SchemaError("response matrix has " + std::to_string(rows_.size()) + " entries, expected " +
                      std::to_string(p) + "x" + std::to_string(s));
  }
  for (std::size_t k = 0; k < rows_.size(); ++k) {
    if (rows_[k] > 1) {
      throw SchemaError("non-binary judgment at participant " + std::to_string(k / s) + ", stimulus " +
                        std::to_string(k % s));
    }
  }
  truth_.reserve(s);
  for (const auto& st : stimuli_) {
    if (st.truth > 1) throw SchemaError("non-binary truth label for stimulus '" + st.id + "'");
    truth_.push_back(st.truth);
  }
  columns_.resize(rows_.size());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < s; ++j) columns_[j * p + i] = rows_[i * s + j];
  }
}

std::vector<std::size_t> ResponseMatrix::stimulus_indices(std::optional<Emotion> filter) const {
  std::vector<std::size_t> out;
  out.reserve(stimuli_.size());
  for (std::size_t s = 0; s < stimuli_.size(); ++s) {
    if (!filter || stimuli_[s].emotion == *filter) out.push_back(s);
  }
  return out;
}

bool ResponseMatrix::has_emotion(Emotion e) const {
  return std::any_of(stimuli_.begin(), stimuli_.end(), [e](const Stimulus& s) { return s.emotion == e; });
}

ResponseMatrix ResponseMatrix::select_participants(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> entries;
  ids.reserve(rows.size());
  entries.reserve(rows.size() * stimuli_.size());
  for (const auto r : rows) {
    if (r >= participants()) throw DomainError("participant index " + std::to_string(r) + " out of range");
    ids.push_back(participant_ids_[r]);
    const auto src = row(r);
    entries.insert(entries.end(), src.begin(), src.end());
  }
  return ResponseMatrix(std::move(ids), stimuli_, std::move(entries));
}

ResponseMatrix ResponseMatrix::complemented() const {
  auto stimuli = stimuli_;
  for (auto& s : stimuli) s.truth = static_cast<std::uint8_t>(1 - s.truth);
  auto entries = rows_;
  for (auto& e : entries) e = static_cast<std::uint8_t>(1 - e);
  return ResponseMatrix(participant_ids_, std::move(stimuli), std::move(entries));
}

void PanelConfig::validate() const {
  const auto prob = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (participants == 0) throw ConfigError("participants must be >= 1");
  if (stimuli_per_emotion == 0) throw ConfigError("stimuli_per_emotion must be >= 1");
  if (emotions.empty()) throw ConfigError("emotions must name at least one emotion");
  for (std::size_t i = 0; i < emotions.size(); ++i) {
    for (std::size_t j = i + 1; j < emotions.size(); ++j) {
      if (emotions[i] == emotions[j]) throw ConfigError("emotions lists '" + std::string(to_string(emotions[i])) + "' twice");
    }
  }
  if (!prob(genuine_fraction)) throw ConfigError("genuine_fraction must be in [0, 1]");
  if (!prob(anti_predictor_fraction)) throw ConfigError("anti_predictor_fraction must be in [0, 1]");
  if (!prob(anti_predictor_accuracy) || anti_predictor_accuracy >= 0.5) {
    throw ConfigError("anti_predictor_accuracy must be in [0, 0.5)");
  }
  if (!std::isfinite(ability_mean)) throw ConfigError("ability_mean must be finite");
  for (const auto& [name, v] : {std::pair{"ability_spread", ability_spread},
                                std::pair{"difficulty_spread", difficulty_spread},
                                std::pair{"emotion_ability_spread", emotion_ability_spread}}) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string(name) + " must be finite and >= 0");
  }
}

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GeneratedPanel generate_panel(const PanelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t p = config.participants;
  const std::size_t per = config.stimuli_per_emotion;

  std::vector<double> ability(p);
  for (auto& a : ability) a = rng.normal(config.ability_mean, config.ability_spread);

  const auto anti_count = static_cast<std::size_t>(std::floor(config.anti_predictor_fraction * double(p) + 0.5));
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  std::vector<bool> anti(p, false);
  for (std::size_t k = 0; k < anti_count; ++k) anti[order[k]] = true;

  std::vector<Stimulus> stimuli;
  std::vector<std::vector<double>> prob_correct(p);  // per participant, per stimulus
  std::vector<AnnotatorProfile> profiles(p);
  for (std::size_t i = 0; i < p; ++i) {
    profiles[i].index = i;
    profiles[i].anti_predictor = anti[i];
    profiles[i].per_emotion_correctness.fill(std::numeric_limits<double>::quiet_NaN());
  }

  const auto genuine_count = static_cast<std::size_t>(std::floor(config.genuine_fraction * double(per) + 0.5));
  for (const auto emotion : config.emotions) {
    std::vector<double> emotion_ability(p);
    for (std::size_t i = 0; i < p; ++i) {
      emotion_ability[i] = ability[i] + config.emotion_ability_spread * rng.normal();
    }
    std::vector<std::uint8_t> labels(per, kActed);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(genuine_count), kGenuine);
    rng.shuffle(std::span(labels));

    std::vector<double> sum(p, 0.0);
    for (std::size_t k = 0; k < per; ++k) {
      const double difficulty = rng.normal(0.0, config.difficulty_spread);
      char id[64];
      std::snprintf(id, sizeof id, "%s_%02zu", std::string(to_string(emotion)).c_str(), k + 1);
      stimuli.push_back(Stimulus{id, emotion, labels[k]});
      for (std::size_t i = 0; i < p; ++i) {
        const double pc = anti[i] ? config.anti_predictor_accuracy : logistic(emotion_ability[i] - difficulty);
        prob_correct[i].push_back(pc);
        sum[i] += pc;
      }
    }
    for (std::size_t i = 0; i < p; ++i) {
      profiles[i].per_emotion_correctness[static_cast<std::size_t>(emotion)] = sum[i] / double(per);
    }
  }

  const std::size_t s_total = stimuli.size();
  std::vector<std::uint8_t> entries(p * s_total);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t s = 0; s < s_total; ++s) {
      const bool correct = rng.uniform() < prob_correct[i][s];
      entries[i * s_total + s] = correct ? stimuli[s].truth : static_cast<std::uint8_t>(1 - stimuli[s].truth);
    }
  }

  std::vector<std::string> ids(p);
  for (std::size_t i = 0; i < p; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "p%03zu", i + 1);
    ids[i] = id;
  }
  return GeneratedPanel{ResponseMatrix(std::move(ids), std::move(stimuli), std::move(entries)), std::move(profiles)};
}

ResponseMatrix dummy_panel(std::size_t correct_count, std::size_t wrong_count, std::size_t stimuli,
                           std::uint64_t seed) {
  const std::size_t p = correct_count + wrong_count;
  if (p == 0) throw ConfigError("dummy panel needs at least one participant");
  if (stimuli == 0) throw ConfigError("dummy panel needs at least one stimulus");

  Rng rng(seed);
  std::vector<std::uint8_t> truth(stimuli);
  for (auto& t : truth) t = static_cast<std::uint8_t>(rng.below(2));
  if (stimuli >= 2) {
    // Force both classes: overwrite one uniformly chosen position.
    const auto ones = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), kGenuine));
    if (ones == 0 || ones == stimuli) {
      truth[static_cast<std::size_t>(rng.below(stimuli))] = static_cast<std::uint8_t>(1 - truth[0]);
    }
  }

  std::vector<Stimulus> st(stimuli);
  for (std::size_t s = 0; s < stimuli; ++s) {
    char id[32];
    std::snprintf(id, sizeof id, "v%02zu", s + 1);
    st[s] = Stimulus{id, Emotion::Anger, truth[s]};
  }
  std::vector<std::uint8_t> entries(p * stimuli);
  std::vector<std::string> ids(p);
  for (std::size_t i = 0; i < p; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "p%02zu", i + 1);
    ids[i] = id;
    const bool right = i < correct_count;
    for (std::size_t s = 0; s < stimuli; ++s) {
      entries[i * stimuli + s] = right ? truth[s] : static_cast<std::uint8_t>(1 - truth[s]);
    }
  }
  return ResponseMatrix(std::move(ids), std::move(st), std::move(entries));
}

std::vector<double> individual_accuracies(const ResponseMatrix& matrix, std::optional<Emotion> emotion_filter) {
  if (!emotion_filter) {
    const auto& k = kernels::active();
    const auto truth = matrix.truth();
    std::vector<double> acc(matrix.participants());
    for (std::size_t i = 0; i < acc.size(); ++i) {
      const auto row = matrix.row(i);
      acc[i] = double(k.count_equal(row.data(), truth.data(), row.size())) / double(row.size());
    }
    return acc;
  }
  const auto idx = matrix.stimulus_indices(emotion_filter);
  if (idx.empty()) {
    throw DomainError("no stimuli tagged '" + std::string(to_string(*emotion_filter)) + "'");
  }
  return individual_accuracies(matrix, idx);
}

std::vector<double> individual_accuracies(const ResponseMatrix& matrix, std::span<const std::size_t> stimuli) {
  if (stimuli.empty()) throw DomainError("accuracy over an empty stimulus set");
  std::vector<std::size_t> correct(matrix.participants(), 0);
  for (const auto s : stimuli) {
    const auto col = matrix.column(s);
    const auto t = matrix.stimulus(s).truth;
    for (std::size_t i = 0; i < col.size(); ++i) correct[i] += (col[i] == t) ? 1 : 0;
  }
  std::vector<double> acc(correct.size());
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = double(correct[i]) / double(stimuli.size());
  return acc;
}

}  // namespace crowdagg
