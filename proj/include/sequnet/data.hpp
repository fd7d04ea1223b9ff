#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "sequnet/tensor.hpp"

namespace sequnet {

enum class TaskKind { char_lm, word_lm, pianoroll, audio };

std::string to_string(TaskKind k);
TaskKind parse_task(const std::string& s);

// Rank-ordered token list; "<unk>" absorbs out-of-vocabulary words.
struct Vocab {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> index;
  int unk = -1;

  int size() const { return static_cast<int>(tokens.size()); }
  int id(const std::string& token) const;
  void add(const std::string& token);

  // One token per line, in rank order.
  static Vocab load(const std::string& path);
  void save(const std::string& path) const;
  // Most frequent first, ties broken lexicographically; "<unk>" always present.
  static Vocab build(const std::vector<std::string>& words, int max_size = 0);
};

// Bytes of a UTF-8 file as symbols 0..255.
std::vector<int> load_char_corpus(const std::string& path);

// Whitespace tokens; every line ends with "<eos>".
std::vector<std::string> read_words(const std::string& path);
std::vector<int> encode_words(const std::vector<std::string>& words, const Vocab& vocab);

// Piano rolls are [pitches x frames] 0/1 tensors.
using PianoRoll = Tensor<float>;
inline constexpr int kPianoPitches = 88;

// JSON: array of pieces; piece = array of frames; frame = array of active pitches.
std::vector<PianoRoll> load_pianoroll(const std::string& path, int pitches = kPianoPitches);
std::vector<PianoRoll> parse_pianoroll(const std::string& json_text, int pitches = kPianoPitches);
std::string pianoroll_to_json(const std::vector<PianoRoll>& pieces);
void save_pianoroll(const std::string& path, const std::vector<PianoRoll>& pieces);

// 16-bit little-endian mono PCM at 16 kHz, raw or in a canonical WAV container.
// Samples are scaled to [-1, 1).
inline constexpr int kAudioRate = 16000;
std::vector<float> load_audio_pcm(const std::string& path);
std::vector<float> decode_audio_bytes(const std::vector<std::uint8_t>& bytes, bool wav);
void save_wav(const std::string& path, const std::vector<float>& samples, int rate = kAudioRate);

// `period` random symbols repeated to `length`.
std::vector<int> periodic_sequence(int period, long length, int vocab, std::uint64_t seed);

// A split of a task: symbol streams or piano rolls (never both).
struct SequenceSet {
  std::vector<std::vector<int>> symbols;
  std::vector<PianoRoll> rolls;

  bool symbolic() const { return rolls.empty(); }
  std::size_t size() const { return symbolic() ? symbols.size() : rolls.size(); }
  long length(std::size_t i) const {
    return symbolic() ? static_cast<long>(symbols[i].size()) : static_cast<long>(rolls[i].time());
  }
};

// Frames [start, start + length) of one sequence. The model reads all but the
// last frame; output frame j is scored against the frame after its position.
struct Window {
  std::size_t sequence = 0;
  long start = 0;
  long length = 0;
};

using Batch = std::vector<Window>;

// One epoch of batches. With target_span > 0 every window holds
// min_length + target_span frames (so exactly target_span predictions) and
// starts at a uniformly random offset; the epoch has enough windows to cover
// the predictable frames once on average. With target_span <= 0 each sequence
// is one whole-sequence window. Sequences too short for a window are skipped
// with a warning on stderr.
std::vector<Batch> make_batches(const SequenceSet& set, long min_length, int batch_size, long target_span,
                                std::mt19937_64& rng);

struct TaskData {
  TaskKind kind = TaskKind::char_lm;
  SequenceSet train;
  SequenceSet valid;
  SequenceSet test;
  Vocab vocab;
  int symbols = 0;  // alphabet size for symbolic tasks, pitches otherwise
};

}  // namespace sequnet
