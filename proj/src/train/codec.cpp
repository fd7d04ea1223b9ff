#include "sequnet/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sequnet/errors.hpp"

namespace sequnet {

int mu_law_encode(double x) {
  if (std::isnan(x)) throw NumericError("mu-law encode of NaN");
  x = std::clamp(x, -1.0, 1.0);
  const double y = std::copysign(std::log1p(255.0 * std::abs(x)) / std::log(256.0), x);
  const double scaled = (y + 1.0) / 2.0 * 255.0;
  const int code = static_cast<int>(std::round(scaled));  // std::round rounds halves away from zero
  return std::clamp(code, 0, 255);
}

double mu_law_decode(int code) {
  if (code < 0 || code > 255) throw IndexError("mu-law code " + std::to_string(code) + " outside [0, 255]");
  const double y = 2.0 * code / 255.0 - 1.0;
  return std::copysign((std::pow(256.0, std::abs(y)) - 1.0) / 255.0, y);
}

std::vector<int> mu_law_encode(std::span<const float> samples) {
  std::vector<int> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = mu_law_encode(samples[i]);
  return out;
}

std::vector<float> mu_law_decode(std::span<const int> codes) {
  std::vector<float> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) out[i] = static_cast<float>(mu_law_decode(codes[i]));
  return out;
}

int sample_with_temperature(std::span<const float> logits, double tau, std::mt19937_64& rng) {
  if (logits.empty()) throw ShapeError("sampling from an empty distribution");
  if (!(tau > 0.0)) throw ConfigError("temperature must be > 0");
  for (float l : logits)
    if (!std::isfinite(l)) throw NumericError("non-finite logit in sampling");
  const auto top = std::max_element(logits.begin(), logits.end());
  if (tau < kGreedyTemperature) return static_cast<int>(top - logits.begin());
  const double mx = *top;
  std::vector<double> w(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    w[i] = std::exp((logits[i] - mx) / tau);
    total += w[i];
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (r < acc) return static_cast<int>(i);
  }
  // Rounding can leave r just past the last partial sum.
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0.0) return static_cast<int>(i);
  return static_cast<int>(top - logits.begin());
}

std::vector<float> sample_pitches(std::span<const float> logits, double tau, std::mt19937_64& rng) {
  if (!(tau > 0.0)) throw ConfigError("temperature must be > 0");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<float> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) throw NumericError("non-finite logit in sampling");
    const double p = tau < kGreedyTemperature ? (logits[i] > 0.0f ? 1.0 : 0.0) : 1.0 / (1.0 + std::exp(-logits[i] / tau));
    out[i] = u(rng) < p ? 1.0f : 0.0f;
  }
  return out;
}

}  // namespace sequnet
