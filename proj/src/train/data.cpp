#include "sequnet/data.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sequnet/errors.hpp"

namespace sequnet {
namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::uint32_t u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::ostream& os, std::uint16_t v) {
  os.put(static_cast<char>(v & 0xff));
  os.put(static_cast<char>(v >> 8));
}

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::char_lm: return "char_lm";
    case TaskKind::word_lm: return "word_lm";
    case TaskKind::pianoroll: return "pianoroll";
    case TaskKind::audio: return "audio";
  }
  return "?";
}

TaskKind parse_task(const std::string& s) {
  if (s == "char_lm") return TaskKind::char_lm;
  if (s == "word_lm") return TaskKind::word_lm;
  if (s == "pianoroll") return TaskKind::pianoroll;
  if (s == "audio") return TaskKind::audio;
  throw ConfigError("data.task: unknown task '" + s + "'");
}

int Vocab::id(const std::string& token) const {
  auto it = index.find(token);
  if (it != index.end()) return it->second;
  if (unk < 0) throw DataError("token '" + token + "' not in vocabulary and no <unk> entry");
  return unk;
}

void Vocab::add(const std::string& token) {
  if (index.count(token)) return;
  index[token] = size();
  tokens.push_back(token);
  if (token == "<unk>") unk = index[token];
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open vocabulary " + path);
  Vocab v;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": empty vocabulary entry");
    if (v.index.count(line)) throw DataError(path + ":" + std::to_string(lineno) + ": duplicate token '" + line + "'");
    v.add(line);
  }
  return v;
}

void Vocab::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write vocabulary " + path);
  for (const auto& t : tokens) f << t << "\n";
}

Vocab Vocab::build(const std::vector<std::string>& words, int max_size) {
  std::map<std::string, long> counts;
  for (const auto& w : words) ++counts[w];
  std::vector<std::pair<std::string, long>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [w, n] : ranked) {
    if (w == "<unk>") continue;
    if (max_size > 0 && v.size() >= max_size - 1) break;
    v.add(w);
  }
  v.add("<unk>");
  return v;
}

std::vector<int> load_char_corpus(const std::string& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

std::vector<std::string> read_words(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    std::string w;
    bool any = false;
    while (ls >> w) {
      out.push_back(w);
      any = true;
    }
    if (any) out.push_back("<eos>");
  }
  return out;
}

std::vector<int> encode_words(const std::vector<std::string>& words, const Vocab& vocab) {
  std::vector<int> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out[i] = vocab.id(words[i]);
  return out;
}

std::vector<PianoRoll> parse_pianoroll(const std::string& text, int pitches) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("piano-roll JSON parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError("piano-roll JSON: top level must be an array of pieces");
  std::vector<PianoRoll> out;
  for (std::size_t p = 0; p < doc.size(); ++p) {
    const auto& piece = doc[p];
    if (!piece.is_array()) throw DataError("piano-roll piece " + std::to_string(p) + ": not an array of frames");
    PianoRoll roll(pitches, static_cast<int>(piece.size()));
    for (std::size_t t = 0; t < piece.size(); ++t) {
      const auto& frame = piece[t];
      if (!frame.is_array())
        throw DataError("piano-roll piece " + std::to_string(p) + " frame " + std::to_string(t) + ": not an array");
      for (const auto& v : frame) {
        if (!v.is_number_integer())
          throw DataError("piano-roll piece " + std::to_string(p) + " frame " + std::to_string(t) +
                          ": pitch is not an integer");
        const int k = v.get<int>();
        if (k < 0 || k >= pitches)
          throw DataError("piano-roll piece " + std::to_string(p) + " frame " + std::to_string(t) + ": pitch " +
                          std::to_string(k) + " outside [0, " + std::to_string(pitches) + ")");
        roll.at(k, static_cast<int>(t)) = 1.0f;
      }
    }
    out.push_back(std::move(roll));
  }
  return out;
}

std::vector<PianoRoll> load_pianoroll(const std::string& path, int pitches) {
  const auto bytes = read_bytes(path);
  return parse_pianoroll(std::string(bytes.begin(), bytes.end()), pitches);
}

std::string pianoroll_to_json(const std::vector<PianoRoll>& pieces) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& roll : pieces) {
    nlohmann::json piece = nlohmann::json::array();
    for (int t = 0; t < roll.time(); ++t) {
      nlohmann::json frame = nlohmann::json::array();
      for (int k = 0; k < roll.channels(); ++k)
        if (roll.at(k, t) > 0.5f) frame.push_back(k);
      piece.push_back(std::move(frame));
    }
    doc.push_back(std::move(piece));
  }
  return doc.dump();
}

void save_pianoroll(const std::string& path, const std::vector<PianoRoll>& pieces) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  f << pianoroll_to_json(pieces) << "\n";
}

std::vector<float> decode_audio_bytes(const std::vector<std::uint8_t>& b, bool wav) {
  std::size_t offset = 0;
  std::size_t end = b.size();
  if (wav) {
    if (b.size() < 44 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
      throw DataError("not a RIFF/WAVE file (offset 0)");
    std::size_t at = 12;
    bool have_fmt = false;
    while (at + 8 <= b.size()) {
      const std::string id(reinterpret_cast<const char*>(b.data() + at), 4);
      const std::uint32_t size = u32(b, at + 4);
      if (id == "fmt ") {
        if (at + 8 + 16 > b.size()) throw DataError("truncated fmt chunk at offset " + std::to_string(at));
        const auto format = u16(b, at + 8);
        const auto channels = u16(b, at + 10);
        const auto rate = u32(b, at + 12);
        const auto bits = u16(b, at + 22);
        if (format != 1) throw DataError("WAV is not PCM (format " + std::to_string(format) + ")");
        if (channels != 1) throw DataError("WAV must be mono, has " + std::to_string(channels) + " channels");
        if (bits != 16) throw DataError("WAV must be 16-bit, is " + std::to_string(bits) + "-bit");
        if (rate != kAudioRate)
          throw DataError("WAV sample rate " + std::to_string(rate) + " Hz, expected " + std::to_string(kAudioRate));
        have_fmt = true;
      } else if (id == "data") {
        if (!have_fmt) throw DataError("WAV data chunk before fmt chunk at offset " + std::to_string(at));
        offset = at + 8;
        end = std::min<std::size_t>(b.size(), offset + size);
        break;
      }
      at += 8 + size + (size & 1);
    }
    if (offset == 0) throw DataError("WAV has no data chunk");
  }
  if ((end - offset) % 2 != 0) throw DataError("odd number of PCM bytes at offset " + std::to_string(end - 1));
  std::vector<float> out((end - offset) / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto raw = static_cast<std::int16_t>(u16(b, offset + 2 * i));
    out[i] = static_cast<float>(raw) / 32768.0f;
  }
  return out;
}

std::vector<float> load_audio_pcm(const std::string& path) {
  const auto bytes = read_bytes(path);
  const bool wav = bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0;
  return decode_audio_bytes(bytes, wav);
}

void save_wav(const std::string& path, const std::vector<float>& samples, int rate) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  put32(f, 36 + data_bytes);
  f.write("WAVEfmt ", 8);
  put32(f, 16);
  put16(f, 1);
  put16(f, 1);
  put32(f, static_cast<std::uint32_t>(rate));
  put32(f, static_cast<std::uint32_t>(rate) * 2);
  put16(f, 2);
  put16(f, 16);
  f.write("data", 4);
  put32(f, data_bytes);
  for (float s : samples) {
    const long v = std::lround(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32767.0);
    put16(f, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
}

std::vector<int> periodic_sequence(int period, long length, int vocab, std::uint64_t seed) {
  if (period < 1 || vocab < 1) throw ConfigError("periodic_sequence: period and vocab must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, vocab - 1);
  std::vector<int> pattern(period);
  for (auto& s : pattern) s = pick(rng);
  std::vector<int> out(length);
  for (long i = 0; i < length; ++i) out[i] = pattern[i % period];
  return out;
}

std::vector<Batch> make_batches(const SequenceSet& set, long min_length, int batch_size, long target_span,
                                std::mt19937_64& rng) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<Window> windows;
  if (target_span <= 0) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.length(i) < min_length + 1) {
        std::cerr << "warning: sequence " << i << " has " << set.length(i) << " frames, needs " << min_length + 1
                  << "; skipped\n";
        continue;
      }
      windows.push_back({i, 0, set.length(i)});
    }
    std::shuffle(windows.begin(), windows.end(), rng);
  } else {
    const long need = min_length + target_span;
    std::vector<std::size_t> usable;
    std::vector<double> weight;
    long predictable = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set.length(i) < need) {
        std::cerr << "warning: sequence " << i << " has " << set.length(i) << " frames, needs " << need
                  << "; skipped\n";
        continue;
      }
      usable.push_back(i);
      weight.push_back(static_cast<double>(set.length(i) - need + 1));
      predictable += set.length(i) - min_length;
    }
    if (usable.empty()) throw DataError("no sequence is long enough for one training window of " + std::to_string(need) + " frames");
    const long count = std::max<long>(1, predictable / target_span);
    std::discrete_distribution<std::size_t> which(weight.begin(), weight.end());
    for (long n = 0; n < count; ++n) {
      const std::size_t s = usable[which(rng)];
      std::uniform_int_distribution<long> start(0, set.length(s) - need);
      windows.push_back({s, start(rng), need});
    }
  }
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < windows.size(); i += batch_size)
    batches.emplace_back(windows.begin() + i, windows.begin() + std::min(windows.size(), i + batch_size));
  return batches;
}

}  // namespace sequnet
