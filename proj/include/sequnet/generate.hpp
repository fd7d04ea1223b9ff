#pragma once

#include <random>
#include <span>
#include <vector>

#include "sequnet/model.hpp"

namespace sequnet {

// Autoregressive continuation. Symbolic models (embedding io, or linear io
// read as one-hot over in_channels) return seed followed by n_steps sampled
// symbols; piano-roll models return the seed roll extended by n_steps frames.
//
// The streaming path keeps a Stream alive; the naive path reruns a full forward
// on a history suffix every step. The suffix starts on a multiple of the phase
// period, so both paths see identical lattices and draw identical samples from
// the same RNG.
std::vector<int> generate_symbols(Model<float>& model, std::span<const int> seed, long n_steps, double temperature,
                                  std::mt19937_64& rng, bool naive = false);
Tensor<float> generate_frames(Model<float>& model, const Tensor<float>& seed, long n_steps, double temperature,
                              std::mt19937_64& rng, bool naive = false);

// Start of the shortest naive-path suffix of a history of length n.
long naive_suffix_start(const ModelGraph& graph, long n);

}  // namespace sequnet
