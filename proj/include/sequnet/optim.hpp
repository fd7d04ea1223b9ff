#pragma once

#include <limits>
#include <optional>

#include "sequnet/checkpoint.hpp"

namespace sequnet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global-norm clipping threshold, or per-value clamp when clip_by_value.
  std::optional<double> clip;
  bool clip_by_value = false;
};

// Adam over every parameter of a store. Moments live in 32-bit like the weights.
class Adam {
 public:
  Adam(ParameterStore<float>& params, AdamConfig config);

  // Clips, then applies one update from the accumulated .grad values.
  // Throws NumericError naming the first parameter with a non-finite gradient.
  void step();

  double learning_rate() const { return config_.learning_rate; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  std::uint64_t steps() const { return t_; }
  // Global gradient norm seen by the last step, before clipping.
  double last_grad_norm() const { return last_norm_; }

  void export_state(OptimizerSection& out) const;
  void import_state(const OptimizerSection& in);

 private:
  ParameterStore<float>* params_;
  AdamConfig config_;
  std::uint64_t t_ = 0;
  double last_norm_ = 0.0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

// Halves the learning rate once the metric (lower is better) has not improved
// for `patience` consecutive epochs and more than `guard_epochs` have passed.
// The stall counter restarts after each halving.
class PlateauSchedule {
 public:
  PlateauSchedule(double learning_rate, int patience, int guard_epochs = 10);

  double on_epoch_end(double metric, int epoch);

  double learning_rate() const { return lr_; }
  double best() const { return best_; }
  int stalled() const { return stalled_; }
  void restore(double lr, double best, int stalled) {
    lr_ = lr;
    best_ = best;
    stalled_ = stalled;
  }

 private:
  double lr_;
  int patience_;
  int guard_;
  double best_ = std::numeric_limits<double>::infinity();
  int stalled_ = 0;
};

}  // namespace sequnet
