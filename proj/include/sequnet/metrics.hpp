#pragma once

#include <random>

#include "sequnet/data.hpp"
#include "sequnet/model.hpp"

namespace sequnet {

// Model input for frames [start, start + length) of a sequence, shaped for the
// model's io_mode: symbols for embedding io, one-hot frames for linear io over
// a symbolic set, 0/1 frames for piano rolls.
template <typename T>
struct ModelInput {
  std::vector<int> symbols;
  Tensor<T> frames;
  bool symbolic = false;
};

template <typename T>
ModelInput<T> make_input(const ModelConfig& config, const SequenceSet& set, std::size_t sequence, long start,
                         long length);

template <typename T>
ForwardResult<T> forward_input(Model<T>& model, Tape<T>& tape, const ModelInput<T>& input, bool training,
                               std::mt19937_64& rng);

template <typename T>
struct WindowLoss {
  Var loss;           // mean over scored frames, in nats
  long frames = 0;    // number of scored frames
};

// Forward over the window minus its last frame; every output frame is scored
// against the input frame right after its position.
template <typename T>
WindowLoss<T> window_loss(Model<T>& model, Tape<T>& tape, const SequenceSet& set, const Window& window,
                          bool training, std::mt19937_64& rng);

struct EvalResult {
  double nats_per_frame = 0.0;
  long frames = 0;
};

// Scores every frame from min_length on exactly once. Windows advance by
// `chunk` targets, a multiple of the model's phase period, so each frame sees
// the same lattice phase as in one long forward pass. chunk <= 0 picks a default.
EvalResult evaluate_nll(Model<float>& model, const SequenceSet& set, long chunk = 0);

double evaluate_bpc(Model<float>& model, const std::vector<int>& stream, long chunk = 0);
double evaluate_word_ppl(Model<float>& model, const std::vector<int>& stream, long chunk = 0);
double evaluate_frame_ppl(Model<float>& model, const std::vector<PianoRoll>& pieces, long chunk = 0);

// Task metric from mean nats: bits per symbol for char and audio tasks,
// perplexity for words and piano rolls.
double task_metric(TaskKind kind, double nats_per_frame);
const char* task_metric_name(TaskKind kind);

}  // namespace sequnet
