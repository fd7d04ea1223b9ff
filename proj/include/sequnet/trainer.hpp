#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sequnet/data.hpp"
#include "sequnet/model.hpp"

namespace sequnet {

// Where a task's data comes from. Empty valid/test paths are carved from the
// tail of the training split (`holdout` of its frames or pieces each).
// period > 0 replaces files with a synthetic periodic symbol stream.
struct TaskSpec {
  TaskKind kind = TaskKind::char_lm;
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string vocab_path;
  int max_vocab = 0;
  double holdout = 0.05;
  int period = 0;
  int period_vocab = 16;
  long period_length = 4096;
};

TaskData load_task(const TaskSpec& spec, std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 16;
  int max_epochs = 100;
  int patience = 5;
  std::optional<double> clip;
  bool clip_by_value = false;
  // Predicted frames per training window; 0 trains on whole sequences.
  long target_span = 64;
  std::uint64_t seed = 1;
  int eval_cadence = 1;
  // Optimizer step budget over the whole run; 0 = unlimited.
  long max_steps = 0;
  // Optimizer steps per epoch; 0 = one pass of make_batches.
  long steps_per_epoch = 0;
  // Stop once the validation metric drops below this value.
  std::optional<double> target_metric;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  long step = 0;
  double train_loss = 0.0;  // mean nats per frame over the epoch's windows
  double valid_metric = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_valid = 0.0;
  int best_epoch = 0;
  std::optional<double> test_metric;
  long steps = 0;
};

// Adam with clipping and plateau halving. The model ends at its best-validation
// weights. With a non-empty out_dir, writes metrics.csv (one row per evaluated
// epoch) and best.ckpt (weights plus optimizer state).
TrainResult train_model(Model<float>& model, const TaskData& task, const TrainConfig& config,
                        const std::string& out_dir, std::ostream* log = nullptr);

// Validation or test metric of the task (lower is better).
double task_split_metric(Model<float>& model, const TaskData& task, const SequenceSet& split);

}  // namespace sequnet
