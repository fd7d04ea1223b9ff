#pragma once

#include <map>
#include <string>
#include <vector>

namespace sequnet {

enum class Variant { plain, residual, dilated_baseline };
enum class IoMode { embedding_tied, linear, pitch_logits };

std::string to_string(Variant v);
std::string to_string(IoMode m);
Variant parse_variant(const std::string& s);
IoMode parse_io_mode(const std::string& s);

// Declarative architecture description.
//
// `levels` counts down-sampling blocks for the U-Net variants and dilation
// levels for the baseline. Plain nets have levels+1 feature resolutions and
// `channels` (if non-empty) lists the width at each one, finest first; the
// baseline takes one entry per level. An empty list means `hidden` everywhere.
struct ModelConfig {
  Variant variant = Variant::plain;
  int levels = 2;
  int stride = 2;
  int filter_width = 3;
  int hidden = 32;
  std::vector<int> channels;
  int residual_features = 32;
  int depth = 0;
  int stacks = 1;
  double dropout = 0.0;
  double input_dropout = 0.0;
  double leaky_slope = 0.01;
  bool weight_norm = false;

  IoMode io_mode = IoMode::linear;
  int vocab_size = 256;
  int embedding_dim = 64;
  int in_channels = 1;
  int out_channels = 1;

  // Throws ConfigError on an invalid combination.
  void validate() const;

  // Channels at every resolution (plain) or level (baseline), resolved.
  std::vector<int> resolved_channels() const;

  // Width of the network input and of the logits, after io_mode.
  int input_width() const;
  int logit_width() const;

  // Applies one "model.<key>" setting (the prefix is optional).
  void set(const std::string& key, const std::string& value);
  static const std::vector<std::string>& keys();

  // Canonical "model.key = value" lines in a fixed key order.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

// Parses "key = value" lines; '#' starts a comment. Duplicate keys keep the last value.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

std::string trim(const std::string& s);

}  // namespace sequnet
