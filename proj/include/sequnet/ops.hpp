#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sequnet/tape.hpp"

namespace sequnet {

// Differentiable 1-D sequence operations. All convolutions are "valid"
// (no zero padding) cross-correlations; nothing here flips kernels.
//
// Parameters are read in the forward pass and their .grad is accumulated in
// the backward pass. Non-recording tapes never touch .grad, so a frozen
// parameter set can be shared by concurrent non-recording forwards.

// out[c][t] = bias[c] + sum_{i,w} kernel[c][i][w] * x[i][t*stride + w*dilation]
template <typename T>
Var conv1d_valid(Tape<T>& tape, Var x, Parameter<T>& kernel, Parameter<T>& bias, int stride = 1, int dilation = 1);

// Adjoint of conv1d_valid's linear map, plus bias. The kernel is laid out
// [out][in][width] from the transposed op's own point of view. Output length
// is (time-1)*stride + width unless out_time is given, in which case frames
// past the natural end hold only the bias and contributions beyond out_time
// are dropped.
template <typename T>
Var conv1d_transposed(Tape<T>& tape, Var x, Parameter<T>& kernel, Parameter<T>& bias, int stride,
                      std::optional<int> out_time = std::nullopt);

template <typename T>
Var crop_front(Tape<T>& tape, Var x, int n);

// out[:, j] = x[:, indices[j]]; the backward pass scatter-adds.
template <typename T>
Var gather_frames(Tape<T>& tape, Var x, std::vector<int> indices);

template <typename T>
Var concat_channels(Tape<T>& tape, Var a, Var b);

template <typename T>
Var add(Tape<T>& tape, Var a, Var b);

template <typename T>
Var leaky_relu(Tape<T>& tape, Var x, T slope);

template <typename T>
Var tanh_act(Tape<T>& tape, Var x);

template <typename T>
Var sigmoid_act(Tape<T>& tape, Var x);

// tanh(a) * sigmoid(b)
template <typename T>
Var gated_activation(Tape<T>& tape, Var a, Var b);

// Inverted dropout. In eval mode (or p == 0) the input Var itself is returned.
template <typename T>
Var dropout(Tape<T>& tape, Var x, double p, bool training, std::mt19937_64& rng);

// table is [V][E]; returns E x indices.size().
template <typename T>
Var embedding_lookup(Tape<T>& tape, Parameter<T>& table, std::span<const int> indices);

// logits[v][t] = sum_e table[v][e] * features[e][t]
template <typename T>
Var tied_projection(Tape<T>& tape, Var features, Parameter<T>& table);

// Mean over frames of -log softmax(logits[:, t])[targets[t]], in nats.
template <typename T>
Var softmax_cross_entropy(Tape<T>& tape, Var logits, std::span<const int> targets);

// (1/T) sum_t sum_p BCE(sigmoid(logits[p][t]), targets[p][t]), in nats.
template <typename T>
Var binary_cross_entropy_sum(Tape<T>& tape, Var logits, const Tensor<T>& targets);

// sum(x * weights); a scalar probe for gradient checks.
template <typename T>
Var weighted_sum(Tape<T>& tape, Var x, const Tensor<T>& weights);

// Leaf wrapping a parameter's current value; backward accumulates into p.grad.
template <typename T>
Var parameter_leaf(Tape<T>& tape, Parameter<T>& p, int channels, int time);

// Output length of conv1d_valid, or -1 when the input is too short.
inline long conv_output_length(long time, int width, int stride, int dilation = 1) {
  const long span = static_cast<long>(width - 1) * dilation + 1;
  if (time < span) return -1;
  return (time - span) / stride + 1;
}

inline long transposed_output_length(long time, int width, int stride) {
  if (time < 1) return -1;
  return (time - 1) * stride + width;
}

}  // namespace sequnet
