#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sequnet/model.hpp"

namespace sequnet {

// Adam moments and schedule progress, stored after the parameters.
struct OptimizerSection {
  std::uint64_t step = 0;
  std::int32_t epoch = 0;
  double learning_rate = 0.0;
  double best_metric = 0.0;
  std::int32_t stalled_epochs = 0;
  // One entry per stored parameter, in store order.
  std::vector<std::vector<float>> first_moment;
  std::vector<std::vector<float>> second_moment;
  bool operator==(const OptimizerSection&) const = default;
};

struct Checkpoint {
  ModelConfig config;
  ParameterStore<float> params;
  std::optional<OptimizerSection> optimizer;
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

// Layout: "SUNW", u16 version, u32 config length + canonical config text,
// u32 parameter count, then per parameter u32 name length + name, u32 rank,
// u32 dims, little-endian f32 values; then u8 has_optimizer and the section.
void save_checkpoint(const std::string& path, const Model<float>& model,
                     const OptimizerSection* optimizer = nullptr);
Checkpoint load_checkpoint(const std::string& path);
Model<float> model_from_checkpoint(const Checkpoint& ckpt);

std::vector<std::uint8_t> serialize_checkpoint(const Model<float>& model, const OptimizerSection* optimizer);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

}  // namespace sequnet
