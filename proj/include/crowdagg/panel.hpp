#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crowdagg {

enum class Emotion : std::uint8_t { Anger = 0, Smile = 1, Fear = 2, Happiness = 3 };

inline constexpr std::array<Emotion, 4> kAllEmotions = {Emotion::Anger, Emotion::Smile, Emotion::Fear,
                                                        Emotion::Happiness};

// Lowercase name as used in labels files ("anger", "smile", ...).
std::string_view to_string(Emotion e) noexcept;
std::optional<Emotion> parse_emotion(std::string_view name) noexcept;

// Labels: 1 = genuine, 0 = acted.
inline constexpr std::uint8_t kGenuine = 1;
inline constexpr std::uint8_t kActed = 0;

struct Stimulus {
  std::string id;
  Emotion emotion = Emotion::Anger;
  std::uint8_t truth = kActed;

  bool operator==(const Stimulus&) const = default;
};

// Dense participants x stimuli grid of binary judgments. Immutable once
// built; both row (participant) and column (stimulus) layouts are kept so
// that accuracy scans and vote/network columns are contiguous.
class ResponseMatrix {
 public:
  // entries is row-major, participants x stimuli.size(). Throws SchemaError
  // on shape mismatch or a non-binary entry.
  ResponseMatrix(std::vector<std::string> participant_ids, std::vector<Stimulus> stimuli,
                 std::vector<std::uint8_t> entries);

  std::size_t participants() const noexcept { return participant_ids_.size(); }
  std::size_t stimuli() const noexcept { return stimuli_.size(); }

  std::uint8_t at(std::size_t participant, std::size_t stimulus) const {
    return rows_[participant * stimuli_.size() + stimulus];
  }

  std::span<const std::uint8_t> row(std::size_t participant) const {
    return {rows_.data() + participant * stimuli_.size(), stimuli_.size()};
  }
  std::span<const std::uint8_t> column(std::size_t stimulus) const {
    return {columns_.data() + stimulus * participant_ids_.size(), participant_ids_.size()};
  }

  const Stimulus& stimulus(std::size_t s) const { return stimuli_[s]; }
  std::span<const Stimulus> stimulus_list() const noexcept { return stimuli_; }
  std::span<const std::uint8_t> truth() const noexcept { return truth_; }
  std::span<const std::string> participant_ids() const noexcept { return participant_ids_; }

  // Indices of all stimuli, or of those tagged with one emotion, in matrix order.
  std::vector<std::size_t> stimulus_indices(std::optional<Emotion> filter = std::nullopt) const;
  bool has_emotion(Emotion e) const;

  // Sub-panel made of the given participant rows, in the given order.
  ResponseMatrix select_participants(std::span<const std::size_t> rows) const;

  // Every judgment and every truth label flipped.
  ResponseMatrix complemented() const;

  bool operator==(const ResponseMatrix& other) const {
    return participant_ids_ == other.participant_ids_ && stimuli_ == other.stimuli_ && rows_ == other.rows_;
  }

 private:
  std::vector<std::string> participant_ids_;
  std::vector<Stimulus> stimuli_;
  std::vector<std::uint8_t> truth_;
  std::vector<std::uint8_t> rows_;
  std::vector<std::uint8_t> columns_;
};

// Generative parameters for a simulated annotator population.
//
// Correctness follows a Rasch-style model: participant i judges stimulus s
// correctly with probability logistic(ability_i,e - difficulty_s), where
// ability_i ~ N(ability_mean, ability_spread), difficulty_s ~
// N(0, difficulty_spread), and the per-emotion ability adds an independent
// N(0, emotion_ability_spread) offset. A fixed share of participants are
// anti-predictors who are correct with probability anti_predictor_accuracy
// regardless of the stimulus.
struct PanelConfig {
  std::size_t participants = 117;
  std::size_t stimuli_per_emotion = 20;
  std::vector<Emotion> emotions{kAllEmotions.begin(), kAllEmotions.end()};
  double genuine_fraction = 0.5;
  double ability_mean = 1.25;
  double ability_spread = 1.0;
  double difficulty_spread = 1.1;
  double emotion_ability_spread = 0.0;
  double anti_predictor_fraction = 0.15;
  double anti_predictor_accuracy = 0.2;
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
};

// Key = value text format, '#' comments. Unknown keys and malformed values
// are ConfigErrors. Keys not present keep their defaults.
PanelConfig parse_panel_config(std::string_view text, const std::string& source = "<config>");
PanelConfig load_panel_config(const std::filesystem::path& path);
std::string format_panel_config(const PanelConfig& config);

struct AnnotatorProfile {
  std::size_t index = 0;
  bool anti_predictor = false;
  // Expected probability of a correct judgment, averaged over the generated
  // stimuli of each emotion; indexed by Emotion. NaN for absent emotions.
  std::array<double, 4> per_emotion_correctness{};

  double correctness(Emotion e) const { return per_emotion_correctness[static_cast<std::size_t>(e)]; }
};

struct GeneratedPanel {
  ResponseMatrix matrix;
  std::vector<AnnotatorProfile> profiles;
};

GeneratedPanel generate_panel(const PanelConfig& config);

// correct_count perfect annotators followed by wrong_count annotators who
// always give the complement of the truth. All stimuli are tagged Anger.
ResponseMatrix dummy_panel(std::size_t correct_count, std::size_t wrong_count, std::size_t stimuli,
                           std::uint64_t seed);

// Fraction of (filtered) stimuli each participant judged correctly.
// Throws DomainError when the filter selects no stimuli.
std::vector<double> individual_accuracies(const ResponseMatrix& matrix,
                                          std::optional<Emotion> emotion_filter = std::nullopt);

// Same, over an explicit stimulus subset.
std::vector<double> individual_accuracies(const ResponseMatrix& matrix, std::span<const std::size_t> stimuli);

// CSV ingestion and emission; see README for the formats.
ResponseMatrix load_matrix(const std::filesystem::path& responses_path, const std::filesystem::path& labels_path);
ResponseMatrix parse_matrix(std::string_view responses_csv, std::string_view labels_csv,
                            const std::string& responses_name = "responses",
                            const std::string& labels_name = "labels");
std::string format_responses_csv(const ResponseMatrix& matrix);
std::string format_labels_csv(const ResponseMatrix& matrix);
std::string format_profiles_csv(std::span<const AnnotatorProfile> profiles, std::span<const std::string> ids);

}  // namespace crowdagg
