#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crowdagg/error.hpp"
#include "crowdagg/mlp.hpp"

namespace crowdagg {

namespace {

constexpr std::string_view kMagic = "crowdagg-mlp";
constexpr int kFormatVersion = 1;

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

// Line-oriented reader with 1-based positions for error messages.
class LineReader {
 public:
  LineReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

  std::string_view next() {
    if (text_.empty()) fail("unexpected end of file");
    ++line_;
    const auto nl = text_.find('\n');
    auto line = text_.substr(0, nl);
    text_.remove_prefix(nl == std::string_view::npos ? text_.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }

  // "key value" -> value; fails if the key differs.
  std::string_view field(std::string_view key) {
    const auto line = next();
    if (line.substr(0, key.size()) != key || (line.size() > key.size() && line[key.size()] != ' ')) {
      fail("expected '" + std::string(key) + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string_view{};
  }

  template <typename T>
  T number(std::string_view token) {
    T out{};
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, out);
    if (ec != std::errc{} || ptr != end) fail("invalid number '" + std::string(token) + "'");
    return out;
  }

  std::vector<double> doubles(std::string_view line, std::size_t expected) {
    std::vector<double> out;
    out.reserve(expected);
    while (!line.empty()) {
      const auto sp = line.find(' ');
      const auto tok = line.substr(0, sp);
      if (!tok.empty()) out.push_back(number<double>(tok));
      if (sp == std::string_view::npos) break;
      line.remove_prefix(sp + 1);
    }
    if (out.size() != expected) {
      fail("expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, 1, what); }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t line_ = 0;
};

}  // namespace

std::string format_model(const MlpModel& m) {
  const auto& hp = m.hyperparams();
  std::string out;
  out += kMagic;
  out += ' ';
  out += std::to_string(kFormatVersion);
  out += "\ninputs " + std::to_string(m.inputs());
  out += "\nhidden " + std::to_string(m.hidden());
  out += "\nepochs " + std::to_string(hp.epochs);
  out += "\nlearning_rate ";
  append_double(out, hp.learning_rate);
  out += "\nseed " + std::to_string(hp.seed);
  out += "\ninit_range ";
  append_double(out, hp.init_range);
  out += "\ninitial_loss ";
  append_double(out, m.initial_loss());
  out += "\nfinal_loss ";
  append_double(out, m.final_loss());
  out += "\ntrained_on " + std::to_string(m.trained_on().size()) + '\n';
  for (const auto& id : m.trained_on()) out += id + '\n';
  out += "input_weights\n";
  for (std::size_t i = 0; i < m.inputs(); ++i) {
    for (std::size_t j = 0; j < m.hidden(); ++j) {
      if (j) out += ' ';
      append_double(out, m.input_weight(i, j));
    }
    out += '\n';
  }
  const auto row = [&](const char* name, auto get) {
    out += name;
    out += '\n';
    for (std::size_t j = 0; j < m.hidden(); ++j) {
      if (j) out += ' ';
      append_double(out, get(j));
    }
    out += '\n';
  };
  row("hidden_biases", [&](std::size_t j) { return m.hidden_bias(j); });
  row("output_weights", [&](std::size_t j) { return m.output_weight(j); });
  out += "output_bias\n";
  append_double(out, m.output_bias());
  out += "\nend\n";
  return out;
}

MlpModel parse_model(std::string_view text, const std::string& source) {
  LineReader r(text, source);
  {
    const auto header = r.next();
    const std::string expected = std::string(kMagic) + " " + std::to_string(kFormatVersion);
    if (header != expected) r.fail("not a version " + std::to_string(kFormatVersion) + " model file");
  }
  MlpHyperparams hp;
  const auto inputs = r.number<std::size_t>(r.field("inputs"));
  hp.hidden_units = r.number<std::size_t>(r.field("hidden"));
  hp.epochs = r.number<std::size_t>(r.field("epochs"));
  hp.learning_rate = r.number<double>(r.field("learning_rate"));
  hp.seed = r.number<std::uint64_t>(r.field("seed"));
  hp.init_range = r.number<double>(r.field("init_range"));
  const auto initial_loss = r.number<double>(r.field("initial_loss"));
  const auto final_loss = r.number<double>(r.field("final_loss"));
  const auto trained_count = r.number<std::size_t>(r.field("trained_on"));

  MlpModel m = [&] {
    try {
      return MlpModel(inputs, hp);
    } catch (const Error& e) {
      r.fail(e.what());
    }
  }();
  m.initial_loss_ = initial_loss;
  m.final_loss_ = final_loss;
  m.trained_on_.reserve(trained_count);
  for (std::size_t k = 0; k < trained_count; ++k) m.trained_on_.emplace_back(r.next());

  if (r.next() != "input_weights") r.fail("expected 'input_weights'");
  for (std::size_t i = 0; i < inputs; ++i) {
    const auto row = r.doubles(r.next(), hp.hidden_units);
    for (std::size_t j = 0; j < hp.hidden_units; ++j) m.set_input_weight(i, j, row[j]);
  }
  if (r.next() != "hidden_biases") r.fail("expected 'hidden_biases'");
  m.hidden_biases_ = r.doubles(r.next(), hp.hidden_units);
  if (r.next() != "output_weights") r.fail("expected 'output_weights'");
  m.output_weights_ = r.doubles(r.next(), hp.hidden_units);
  if (r.next() != "output_bias") r.fail("expected 'output_bias'");
  m.output_bias_ = r.doubles(r.next(), 1)[0];
  if (r.next() != "end") r.fail("expected 'end'");
  return m;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << format_model(model);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open model file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path.string());
}

}  // namespace crowdagg
