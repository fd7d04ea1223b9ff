#include "sequnet/metrics.hpp"

#include <cmath>
#include <numbers>

namespace sequnet {

template <typename T>
ModelInput<T> make_input(const ModelConfig& config, const SequenceSet& set, std::size_t sequence, long start,
                         long length) {
  ModelInput<T> in;
  if (set.symbolic()) {
    const auto& s = set.symbols.at(sequence);
    if (start < 0 || start + length > static_cast<long>(s.size())) throw IndexError("window outside sequence");
    if (config.io_mode == IoMode::embedding_tied) {
      in.symbolic = true;
      in.symbols.assign(s.begin() + start, s.begin() + start + length);
      for (int v : in.symbols)
        if (v >= config.vocab_size) throw DataError("symbol " + std::to_string(v) + " outside model vocabulary");
    } else if (config.io_mode == IoMode::linear) {
      in.frames = Tensor<T>(config.in_channels, static_cast<int>(length));
      for (long t = 0; t < length; ++t) {
        const int v = s[start + t];
        if (v >= config.in_channels) throw DataError("symbol " + std::to_string(v) + " exceeds one-hot width");
        in.frames.at(v, static_cast<int>(t)) = T(1);
      }
    } else {
      throw ConfigError("io_mode/task mismatch: pitch_logits needs piano-roll data");
    }
  } else {
    if (config.io_mode != IoMode::pitch_logits) throw ConfigError("io_mode/task mismatch: piano rolls need pitch_logits");
    const auto& r = set.rolls.at(sequence);
    if (r.channels() != config.in_channels) throw DataError("piano roll pitch count does not match the model");
    if (start < 0 || start + length > r.time()) throw IndexError("window outside piece");
    in.frames = Tensor<T>(r.channels(), static_cast<int>(length));
    for (int p = 0; p < r.channels(); ++p)
      for (long t = 0; t < length; ++t) in.frames.at(p, static_cast<int>(t)) = static_cast<T>(r.at(p, static_cast<int>(start + t)));
  }
  return in;
}

template <typename T>
ForwardResult<T> forward_input(Model<T>& model, Tape<T>& tape, const ModelInput<T>& input, bool training,
                               std::mt19937_64& rng) {
  if (input.symbolic) return forward(model, tape, std::span<const int>(input.symbols), training, rng);
  return forward(model, tape, input.frames, training, rng);
}

template <typename T>
WindowLoss<T> window_loss(Model<T>& model, Tape<T>& tape, const SequenceSet& set, const Window& w, bool training,
                          std::mt19937_64& rng) {
  const ModelConfig& c = model.config();
  if (w.length < 2) throw InsufficientLength(model.min_input_length() + 1, w.length, "training window");
  auto input = make_input<T>(c, set, w.sequence, w.start, w.length - 1);
  auto fwd = forward_input(model, tape, input, training, rng);
  const Grid& g = fwd.output_grid;
  WindowLoss<T> out;
  out.frames = g.length;
  if (set.symbolic()) {
    const auto& s = set.symbols[w.sequence];
    std::vector<int> targets(g.length);
    for (long j = 0; j < g.length; ++j) targets[j] = s[w.start + g.position(j) + 1];
    out.loss = softmax_cross_entropy(tape, fwd.logits, std::span<const int>(targets));
  } else {
    const auto& r = set.rolls[w.sequence];
    Tensor<T> targets(r.channels(), static_cast<int>(g.length));
    for (int p = 0; p < r.channels(); ++p)
      for (long j = 0; j < g.length; ++j)
        targets.at(p, static_cast<int>(j)) = static_cast<T>(r.at(p, static_cast<int>(w.start + g.position(j) + 1)));
    out.loss = binary_cross_entropy_sum(tape, fwd.logits, targets);
  }
  return out;
}

EvalResult evaluate_nll(Model<float>& model, const SequenceSet& set, long chunk) {
  const long period = model.graph().phase_period();
  const long min_len = model.min_input_length();
  if (chunk <= 0) chunk = period * ((255 + period) / period);
  if (chunk % period != 0) throw ConfigError("evaluation chunk must be a multiple of the phase period");
  double total = 0.0;
  long frames = 0;
  std::mt19937_64 rng(0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const long n = set.length(i);
    for (long s = 0; s + min_len < n; s += chunk) {
      const long input_len = std::min(min_len + chunk - 1, n - 1 - s);
      Tape<float> tape(false);
      auto wl = window_loss(model, tape, set, Window{i, s, input_len + 1}, false, rng);
      total += static_cast<double>(tape.scalar(wl.loss)) * wl.frames;
      frames += wl.frames;
    }
  }
  if (frames == 0)
    throw InsufficientLength(min_len + 1, set.size() ? set.length(0) : 0, "evaluation needs a sequence longer than the minimum input length");
  return {total / frames, frames};
}

double evaluate_bpc(Model<float>& model, const std::vector<int>& stream, long chunk) {
  SequenceSet s;
  s.symbols.push_back(stream);
  return evaluate_nll(model, s, chunk).nats_per_frame / std::numbers::ln2;
}

double evaluate_word_ppl(Model<float>& model, const std::vector<int>& stream, long chunk) {
  SequenceSet s;
  s.symbols.push_back(stream);
  return std::exp(evaluate_nll(model, s, chunk).nats_per_frame);
}

double evaluate_frame_ppl(Model<float>& model, const std::vector<PianoRoll>& pieces, long chunk) {
  SequenceSet s;
  s.rolls = pieces;
  return std::exp(evaluate_nll(model, s, chunk).nats_per_frame);
}

double task_metric(TaskKind kind, double nats) {
  switch (kind) {
    case TaskKind::char_lm:
    case TaskKind::audio: return nats / std::numbers::ln2;
    case TaskKind::word_lm:
    case TaskKind::pianoroll: return std::exp(nats);
  }
  return nats;
}

const char* task_metric_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::char_lm: return "bpc";
    case TaskKind::audio: return "bits_per_sample";
    case TaskKind::word_lm: return "word_ppl";
    case TaskKind::pianoroll: return "frame_ppl";
  }
  return "nll";
}

#define SEQUNET_INSTANTIATE_METRICS(T)                                                                      \
  template ModelInput<T> make_input<T>(const ModelConfig&, const SequenceSet&, std::size_t, long, long);    \
  template ForwardResult<T> forward_input<T>(Model<T>&, Tape<T>&, const ModelInput<T>&, bool,               \
                                             std::mt19937_64&);                                             \
  template WindowLoss<T> window_loss<T>(Model<T>&, Tape<T>&, const SequenceSet&, const Window&, bool,       \
                                        std::mt19937_64&);

SEQUNET_INSTANTIATE_METRICS(float)
SEQUNET_INSTANTIATE_METRICS(double)

}  // namespace sequnet
