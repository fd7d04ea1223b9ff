#pragma once

#include <random>
#include <span>
#include <vector>

namespace sequnet {

// 8-bit mu-law: y = sign(x) ln(1 + 255|x|) / ln 256, code = round((y + 1) / 2 * 255)
// with halves rounded away from zero. Inputs outside [-1, 1] are clamped.
int mu_law_encode(double x);
// Inverse companding of the code's bin centre 2c/255 - 1.
double mu_law_decode(int code);

std::vector<int> mu_law_encode(std::span<const float> samples);
std::vector<float> mu_law_decode(std::span<const int> codes);

// Below this temperature sampling degenerates to argmax.
inline constexpr double kGreedyTemperature = 1e-6;

// Draws from softmax(logits / tau). tau <= 0 is rejected; tau below
// kGreedyTemperature returns the argmax, ties to the lowest index.
// Throws NumericError on a non-finite logit.
int sample_with_temperature(std::span<const float> logits, double tau, std::mt19937_64& rng);

// Independent Bernoulli draw per pitch with p = sigmoid(logit / tau).
std::vector<float> sample_pitches(std::span<const float> logits, double tau, std::mt19937_64& rng);

}  // namespace sequnet
