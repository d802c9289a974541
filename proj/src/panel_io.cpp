#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "crowdagg/error.hpp"
#include "crowdagg/panel.hpp"

namespace crowdagg {

namespace {

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(std::string("cannot open ") + what + " file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits text into non-empty lines (trailing blank lines ignored), keeping
// the 1-based source line number of each.
std::vector<std::pair<std::size_t, std::string_view>> split_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) lines.emplace_back(line_no, line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto comma = line.find(',');
    cells.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

std::uint8_t parse_bit(std::string_view cell, const std::string& file, std::size_t row, std::size_t col) {
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  throw ParseError(file, row, col, "expected 0 or 1, got '" + std::string(cell) + "'");
}

}  // namespace

ResponseMatrix parse_matrix(std::string_view responses_csv, std::string_view labels_csv,
                            const std::string& responses_name, const std::string& labels_name) {
  const auto rlines = split_lines(responses_csv);
  if (rlines.empty()) throw SchemaError(responses_name + ": empty file");
  const auto llines = split_lines(labels_csv);
  if (llines.empty()) throw SchemaError(labels_name + ": empty file");

  const auto header = split_cells(rlines[0].second);
  if (header[0] != "participant_id") {
    throw SchemaError(responses_name + ": header must start with 'participant_id'");
  }
  if (header.size() < 2) throw SchemaError(responses_name + ": header names no stimuli");
  std::vector<std::string> stimulus_ids;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string id(header[c]);
    if (id.empty()) throw ParseError(responses_name, rlines[0].first, c + 1, "empty stimulus id");
    if (!seen.insert(id).second) throw SchemaError(responses_name + ": duplicate stimulus id '" + id + "'");
    stimulus_ids.push_back(std::move(id));
  }
  if (rlines.size() < 2) throw SchemaError(responses_name + ": no participant rows");

  std::vector<std::string> participants;
  std::vector<std::uint8_t> entries;
  entries.reserve((rlines.size() - 1) * stimulus_ids.size());
  for (std::size_t r = 1; r < rlines.size(); ++r) {
    const auto [line_no, line] = rlines[r];
    const auto cells = split_cells(line);
    if (cells.size() != header.size()) {
      throw SchemaError(responses_name + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    if (cells[0].empty()) throw ParseError(responses_name, line_no, 1, "empty participant id");
    participants.emplace_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) entries.push_back(parse_bit(cells[c], responses_name, line_no, c + 1));
  }

  const auto lheader = split_cells(llines[0].second);
  if (lheader.size() != 3 || lheader[0] != "stimulus_id" || lheader[1] != "emotion" || lheader[2] != "truth") {
    throw SchemaError(labels_name + ": header must be 'stimulus_id,emotion,truth'");
  }
  std::unordered_map<std::string, Stimulus> labels;
  for (std::size_t r = 1; r < llines.size(); ++r) {
    const auto [line_no, line] = llines[r];
    const auto cells = split_cells(line);
    if (cells.size() != 3) {
      throw SchemaError(labels_name + ":" + std::to_string(line_no) + ": expected 3 cells, got " +
                        std::to_string(cells.size()));
    }
    const auto emotion = parse_emotion(cells[1]);
    if (!emotion) throw ParseError(labels_name, line_no, 2, "unknown emotion '" + std::string(cells[1]) + "'");
    const auto truth = parse_bit(cells[2], labels_name, line_no, 3);
    std::string id(cells[0]);
    if (!labels.emplace(id, Stimulus{id, *emotion, truth}).second) {
      throw SchemaError(labels_name + ": stimulus id '" + id + "' listed more than once");
    }
  }

  std::vector<Stimulus> stimuli;
  stimuli.reserve(stimulus_ids.size());
  for (const auto& id : stimulus_ids) {
    const auto it = labels.find(id);
    if (it == labels.end()) throw SchemaError(labels_name + ": no label for stimulus '" + id + "'");
    stimuli.push_back(it->second);
  }
  if (labels.size() != stimulus_ids.size()) {
    for (const auto& [id, _] : labels) {
      if (!seen.count(id)) throw SchemaError(labels_name + ": stimulus '" + id + "' does not appear in responses");
    }
  }
  return ResponseMatrix(std::move(participants), std::move(stimuli), std::move(entries));
}

ResponseMatrix load_matrix(const std::filesystem::path& responses_path, const std::filesystem::path& labels_path) {
  return parse_matrix(read_file(responses_path, "responses"), read_file(labels_path, "labels"),
                      responses_path.string(), labels_path.string());
}

std::string format_responses_csv(const ResponseMatrix& matrix) {
  std::string out = "participant_id";
  for (const auto& s : matrix.stimulus_list()) {
    out += ',';
    out += s.id;
  }
  out += '\n';
  for (std::size_t i = 0; i < matrix.participants(); ++i) {
    out += matrix.participant_ids()[i];
    for (const auto v : matrix.row(i)) {
      out += ',';
      out += static_cast<char>('0' + v);
    }
    out += '\n';
  }
  return out;
}

std::string format_labels_csv(const ResponseMatrix& matrix) {
  std::string out = "stimulus_id,emotion,truth\n";
  for (const auto& s : matrix.stimulus_list()) {
    out += s.id;
    out += ',';
    out += to_string(s.emotion);
    out += ',';
    out += static_cast<char>('0' + s.truth);
    out += '\n';
  }
  return out;
}

std::string format_profiles_csv(std::span<const AnnotatorProfile> profiles, std::span<const std::string> ids) {
  std::string out = "participant_id,anti_predictor";
  for (const auto e : kAllEmotions) {
    out += ",p_correct_";
    out += to_string(e);
  }
  out += '\n';
  char buf[64];
  for (const auto& p : profiles) {
    out += p.index < ids.size() ? ids[p.index] : std::to_string(p.index);
    out += p.anti_predictor ? ",1" : ",0";
    for (const auto v : p.per_emotion_correctness) {
      if (std::isnan(v)) {
        out += ",";
      } else {
        std::snprintf(buf, sizeof buf, ",%.6f", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// PanelConfig text format

namespace {

template <typename T>
T parse_number(std::string_view value, const std::string& source, std::size_t line, const std::string& key) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid value '" + std::string(value) + "' for " + key);
  }
  return out;
}

}  // namespace

PanelConfig parse_panel_config(std::string_view text, const std::string& source) {
  PanelConfig cfg;
  std::unordered_set<std::string> seen;
  for (const auto& [line_no, raw] : split_lines(text)) {
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key " + key);

    if (key == "participants") {
      cfg.participants = parse_number<std::size_t>(value, source, line_no, key);
    } else if (key == "stimuli_per_emotion") {
      cfg.stimuli_per_emotion = parse_number<std::size_t>(value, source, line_no, key);
    } else if (key == "emotions") {
      cfg.emotions.clear();
      auto rest = value;
      for (;;) {
        const auto comma = rest.find(',');
        const auto name = trim(rest.substr(0, comma));
        const auto e = parse_emotion(name);
        if (!e) {
          throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown emotion '" + std::string(name) + "'");
        }
        cfg.emotions.push_back(*e);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
    } else if (key == "genuine_fraction") {
      cfg.genuine_fraction = parse_number<double>(value, source, line_no, key);
    } else if (key == "ability_mean") {
      cfg.ability_mean = parse_number<double>(value, source, line_no, key);
    } else if (key == "ability_spread") {
      cfg.ability_spread = parse_number<double>(value, source, line_no, key);
    } else if (key == "difficulty_spread") {
      cfg.difficulty_spread = parse_number<double>(value, source, line_no, key);
    } else if (key == "emotion_ability_spread") {
      cfg.emotion_ability_spread = parse_number<double>(value, source, line_no, key);
    } else if (key == "anti_predictor_fraction") {
      cfg.anti_predictor_fraction = parse_number<double>(value, source, line_no, key);
    } else if (key == "anti_predictor_accuracy") {
      cfg.anti_predictor_accuracy = parse_number<double>(value, source, line_no, key);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, source, line_no, key);
    } else {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

PanelConfig load_panel_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_panel_config(ss.str(), path.string());
}

std::string format_panel_config(const PanelConfig& c) {
  std::string emotions;
  for (const auto e : c.emotions) {
    if (!emotions.empty()) emotions += ',';
    emotions += to_string(e);
  }
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "participants = %zu\n"
                "stimuli_per_emotion = %zu\n"
                "emotions = %s\n"
                "genuine_fraction = %.17g\n"
                "ability_mean = %.17g\n"
                "ability_spread = %.17g\n"
                "difficulty_spread = %.17g\n"
                "emotion_ability_spread = %.17g\n"
                "anti_predictor_fraction = %.17g\n"
                "anti_predictor_accuracy = %.17g\n"
                "seed = %llu\n",
                c.participants, c.stimuli_per_emotion, emotions.c_str(), c.genuine_fraction, c.ability_mean,
                c.ability_spread, c.difficulty_spread, c.emotion_ability_spread, c.anti_predictor_fraction,
                c.anti_predictor_accuracy, static_cast<unsigned long long>(c.seed));
  return buf;
}

}  // namespace crowdagg
