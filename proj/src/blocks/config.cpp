#include "sequnet/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "sequnet/errors.hpp"

namespace sequnet {
namespace {

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("model." + key + ": not an integer: '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(out))
    throw ConfigError("model." + key + ": not a number: '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("model." + key + ": not a boolean: '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_int(key, item));
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::plain: return "plain";
    case Variant::residual: return "residual";
    case Variant::dilated_baseline: return "dilated_baseline";
  }
  return "?";
}

std::string to_string(IoMode m) {
  switch (m) {
    case IoMode::embedding_tied: return "embedding_tied";
    case IoMode::linear: return "linear";
    case IoMode::pitch_logits: return "pitch_logits";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "plain") return Variant::plain;
  if (s == "residual") return Variant::residual;
  if (s == "dilated_baseline") return Variant::dilated_baseline;
  throw ConfigError("model.variant: unknown variant '" + s + "'");
}

IoMode parse_io_mode(const std::string& s) {
  if (s == "embedding_tied") return IoMode::embedding_tied;
  if (s == "linear") return IoMode::linear;
  if (s == "pitch_logits") return IoMode::pitch_logits;
  throw ConfigError("model.io_mode: unknown mode '" + s + "'");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid model config: " + m); };
  if (variant == Variant::dilated_baseline) {
    if (levels < 1) fail("levels must be >= 1 for the baseline");
  } else if (levels < 0) {
    fail("levels must be >= 0");
  }
  if (stride < 2) fail("stride must be >= 2");
  if (filter_width < 1) fail("filter_width must be >= 1");
  if (depth < 0) fail("depth must be >= 0");
  if (stacks < 1) fail("stacks must be >= 1");
  if (variant != Variant::residual && depth > 0) fail("depth applies only to the residual variant");
  if (variant != Variant::dilated_baseline && stacks != 1) fail("stacks applies only to the baseline");
  if (variant == Variant::residual && residual_features < 1) fail("residual_features must be >= 1");
  if (variant == Variant::residual && !channels.empty()) fail("channels does not apply to the residual variant");
  if (hidden < 1) fail("hidden must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!(input_dropout >= 0.0 && input_dropout < 1.0)) fail("input_dropout must lie in [0, 1)");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) fail("leaky_slope must lie in [0, 1)");
  if (!channels.empty()) {
    const std::size_t want = variant == Variant::plain ? static_cast<std::size_t>(levels) + 1 : levels;
    if (channels.size() != want)
      fail("channels needs " + std::to_string(want) + " entries, got " + std::to_string(channels.size()));
    for (int c : channels)
      if (c < 1) fail("channel counts must be >= 1");
  }
  switch (io_mode) {
    case IoMode::embedding_tied:
      if (vocab_size < 1 || embedding_dim < 1) fail("embedding_tied needs vocab_size and embedding_dim >= 1");
      break;
    case IoMode::linear:
      if (in_channels < 1 || out_channels < 1) fail("linear io needs in_channels and out_channels >= 1");
      break;
    case IoMode::pitch_logits:
      if (in_channels < 1) fail("pitch_logits needs in_channels >= 1");
      if (out_channels != in_channels) fail("pitch_logits predicts the input pitches: out_channels must equal in_channels");
      break;
  }
}

std::vector<int> ModelConfig::resolved_channels() const {
  if (!channels.empty()) return channels;
  if (variant == Variant::plain) return std::vector<int>(levels + 1, hidden);
  if (variant == Variant::dilated_baseline) return std::vector<int>(levels, hidden);
  return {};
}

int ModelConfig::input_width() const { return io_mode == IoMode::embedding_tied ? embedding_dim : in_channels; }
int ModelConfig::logit_width() const { return io_mode == IoMode::embedding_tied ? vocab_size : out_channels; }

const std::vector<std::string>& ModelConfig::keys() {
  static const std::vector<std::string> k = {
      "variant",      "levels",        "stride",      "filter_width", "hidden",     "channels",
      "residual_features", "depth",    "stacks",      "dropout",      "input_dropout", "leaky_slope",
      "weight_norm",  "io_mode",       "vocab_size",  "embedding_dim", "in_channels", "out_channels"};
  return k;
}

void ModelConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  if (key.rfind("model.", 0) == 0) key = key.substr(6);
  const std::string v = trim(raw_value);
  if (key == "variant") variant = parse_variant(v);
  else if (key == "levels") levels = to_int(key, v);
  else if (key == "stride") stride = to_int(key, v);
  else if (key == "filter_width") filter_width = to_int(key, v);
  else if (key == "hidden") hidden = to_int(key, v);
  else if (key == "channels") channels = to_int_list(key, v);
  else if (key == "residual_features") residual_features = to_int(key, v);
  else if (key == "depth") depth = to_int(key, v);
  else if (key == "stacks") stacks = to_int(key, v);
  else if (key == "dropout") dropout = to_double(key, v);
  else if (key == "input_dropout") input_dropout = to_double(key, v);
  else if (key == "leaky_slope") leaky_slope = to_double(key, v);
  else if (key == "weight_norm") weight_norm = to_bool(key, v);
  else if (key == "io_mode") io_mode = parse_io_mode(v);
  else if (key == "vocab_size") vocab_size = to_int(key, v);
  else if (key == "embedding_dim") embedding_dim = to_int(key, v);
  else if (key == "in_channels") in_channels = to_int(key, v);
  else if (key == "out_channels") out_channels = to_int(key, v);
  else throw ConfigError("unknown config key: model." + key);
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  std::string ch;
  for (std::size_t i = 0; i < channels.size(); ++i) ch += (i ? "," : "") + std::to_string(channels[i]);
  os << "model.variant = " << to_string(variant) << "\n"
     << "model.levels = " << levels << "\n"
     << "model.stride = " << stride << "\n"
     << "model.filter_width = " << filter_width << "\n"
     << "model.hidden = " << hidden << "\n"
     << "model.channels = " << ch << "\n"
     << "model.residual_features = " << residual_features << "\n"
     << "model.depth = " << depth << "\n"
     << "model.stacks = " << stacks << "\n"
     << "model.dropout = " << format_double(dropout) << "\n"
     << "model.input_dropout = " << format_double(input_dropout) << "\n"
     << "model.leaky_slope = " << format_double(leaky_slope) << "\n"
     << "model.weight_norm = " << (weight_norm ? "true" : "false") << "\n"
     << "model.io_mode = " << to_string(io_mode) << "\n"
     << "model.vocab_size = " << vocab_size << "\n"
     << "model.embedding_dim = " << embedding_dim << "\n"
     << "model.in_channels = " << in_channels << "\n"
     << "model.out_channels = " << out_channels << "\n";
  return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig c;
  for (const auto& [k, v] : parse_key_values(text)) c.set(k, v);
  return c;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

}  // namespace sequnet
