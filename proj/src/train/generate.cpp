#include "sequnet/generate.hpp"

#include "sequnet/codec.hpp"
#include "sequnet/stream.hpp"

namespace sequnet {

long naive_suffix_start(const ModelGraph& graph, long n) {
  const long period = graph.phase_period();
  const long spare = n - graph.min_length - period;
  return spare <= 0 ? 0 : (spare / period) * period;
}

namespace {

bool one_hot_io(const ModelConfig& c) { return c.io_mode == IoMode::linear; }

Tensor<float> one_hot(std::span<const int> symbols, int width) {
  Tensor<float> t(width, static_cast<int>(symbols.size()));
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] < 0 || symbols[i] >= width) throw IndexError("symbol " + std::to_string(symbols[i]) + " exceeds one-hot width");
    t.at(symbols[i], static_cast<int>(i)) = 1.0f;
  }
  return t;
}

std::vector<float> last_column(const Tensor<float>& logits, const Grid& grid, long n) {
  if (grid.length == 0 || grid.last() != n - 1) throw AlignmentError("naive forward does not end on the newest frame");
  std::vector<float> out(logits.channels());
  for (int c = 0; c < logits.channels(); ++c) out[c] = logits.at(c, logits.time() - 1);
  return out;
}

std::vector<float> naive_symbol_logits(Model<float>& model, const std::vector<int>& history) {
  const long n = static_cast<long>(history.size());
  const long s = naive_suffix_start(model.graph(), n);
  std::span<const int> suffix(history.data() + s, history.size() - s);
  Tape<float> tape(false);
  std::mt19937_64 unused(0);
  auto fwd = one_hot_io(model.config())
                 ? forward(model, tape, one_hot(suffix, model.config().in_channels), false, unused)
                 : forward(model, tape, suffix, false, unused);
  return last_column(tape.value(fwd.logits), fwd.output_grid, n - s);
}

}  // namespace

std::vector<int> generate_symbols(Model<float>& model, std::span<const int> seed, long n_steps, double temperature,
                                  std::mt19937_64& rng, bool naive) {
  const ModelConfig& c = model.config();
  if (c.io_mode == IoMode::pitch_logits) throw ConfigError("io_mode/task mismatch: symbol generation needs a symbolic model");
  if (n_steps < 0) throw ConfigError("n_steps must be >= 0");
  if (static_cast<long>(seed.size()) < model.min_input_length())
    throw InsufficientLength(model.min_input_length(), static_cast<long>(seed.size()), "generation seed");
  std::vector<int> out(seed.begin(), seed.end());
  if (n_steps == 0) return out;
  out.reserve(out.size() + n_steps);

  if (naive) {
    for (long i = 0; i < n_steps; ++i) {
      const auto logits = naive_symbol_logits(model, out);
      out.push_back(sample_with_temperature(logits, temperature, rng));
    }
    return out;
  }

  if (one_hot_io(c)) {
    Stream<float> stream(model, one_hot(seed, c.in_channels));
    std::vector<float> logits = stream.first_logits();
    std::vector<float> frame(c.in_channels, 0.0f);
    for (long i = 0; i < n_steps; ++i) {
      const int sym = sample_with_temperature(logits, temperature, rng);
      out.push_back(sym);
      if (i + 1 == n_steps) break;
      std::fill(frame.begin(), frame.end(), 0.0f);
      frame[sym] = 1.0f;
      logits = stream.step(std::span<const float>(frame));
    }
    return out;
  }

  Stream<float> stream(model, seed);
  std::vector<float> logits = stream.first_logits();
  for (long i = 0; i < n_steps; ++i) {
    const int sym = sample_with_temperature(logits, temperature, rng);
    out.push_back(sym);
    if (i + 1 == n_steps) break;
    logits = stream.step(sym);
  }
  return out;
}

Tensor<float> generate_frames(Model<float>& model, const Tensor<float>& seed, long n_steps, double temperature,
                              std::mt19937_64& rng, bool naive) {
  const ModelConfig& c = model.config();
  if (c.io_mode != IoMode::pitch_logits) throw ConfigError("io_mode/task mismatch: frame generation needs pitch io");
  if (n_steps < 0) throw ConfigError("n_steps must be >= 0");
  if (seed.time() < model.min_input_length())
    throw InsufficientLength(model.min_input_length(), seed.time(), "generation seed");
  if (seed.channels() != c.in_channels) throw ShapeError("seed roll has the wrong pitch count");
  const long n0 = seed.time();
  Tensor<float> out(seed.channels(), static_cast<int>(n0 + n_steps));
  for (int p = 0; p < seed.channels(); ++p)
    for (long t = 0; t < n0; ++t) out.at(p, static_cast<int>(t)) = seed.at(p, static_cast<int>(t));
  if (n_steps == 0) return out;

  auto put = [&](long t, const std::vector<float>& f) {
    for (int p = 0; p < out.channels(); ++p) out.at(p, static_cast<int>(t)) = f[p];
  };

  if (naive) {
    for (long i = 0; i < n_steps; ++i) {
      const long n = n0 + i;
      const long s = naive_suffix_start(model.graph(), n);
      Tensor<float> suffix(out.channels(), static_cast<int>(n - s));
      for (int p = 0; p < out.channels(); ++p)
        for (long t = s; t < n; ++t) suffix.at(p, static_cast<int>(t - s)) = out.at(p, static_cast<int>(t));
      Tape<float> tape(false);
      std::mt19937_64 unused(0);
      auto fwd = forward(model, tape, suffix, false, unused);
      put(n, sample_pitches(last_column(tape.value(fwd.logits), fwd.output_grid, n - s), temperature, rng));
    }
    return out;
  }

  Stream<float> stream(model, seed);
  std::vector<float> logits = stream.first_logits();
  for (long i = 0; i < n_steps; ++i) {
    const auto frame = sample_pitches(logits, temperature, rng);
    put(n0 + i, frame);
    if (i + 1 == n_steps) break;
    logits = stream.step(std::span<const float>(frame));
  }
  return out;
}

}  // namespace sequnet
