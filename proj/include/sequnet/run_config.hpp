#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sequnet/config.hpp"
#include "sequnet/trainer.hpp"

namespace sequnet {

struct GenerateSettings {
  long steps = 256;
  double temperature = 0.95;
  long seed_length = 0;  // 0 = the model's minimum input length
  bool naive = false;
  std::string prompt;    // optional file read with the task's loader
};

struct ProfileSettings {
  long input_length = 0;  // 0 = smallest multiple of the phase period >= min length
  long update_steps = 0;  // 0 = 10 phase periods
  long bench_steps = 0;   // 0 skips the timing benchmark
  int bench_runs = 5;
  std::string compare;    // config file of a second model to time against
};

// Everything one command needs: "section.key = value" settings merged from a
// config file and flag overrides. Unknown keys are a ConfigError.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  TaskSpec task;
  GenerateSettings generate;
  ProfileSettings profile;
  int gradcheck_instances = 20;
  std::uint64_t seed = 1;
  std::string out_dir = "run";

  // `base_dir` anchors relative data paths (the config file's directory).
  void set(const std::string& key, const std::string& value, const std::string& base_dir = "");
  static const std::vector<std::string>& keys();
  std::string to_text() const;
  void validate() const;

  static RunConfig from_text(const std::string& text, const std::string& base_dir = "");
  static RunConfig load(const std::string& path);
};

}  // namespace sequnet
