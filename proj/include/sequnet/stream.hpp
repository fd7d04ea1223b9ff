#pragma once

#include <span>
#include <vector>

#include "sequnet/model.hpp"

namespace sequnet {

// Clocked incremental inference over a frozen model.
//
// Every node keeps the newest frames it produced in a ring buffer. A node on a
// lattice of spacing s with first position f recomputes at input position p
// iff (p - f) % s == 0; everything else reuses its cached frames. The lattice
// comes from the context length, so the first step continues exactly where
// the initialising forward pass stopped.
template <typename T>
class Stream {
 public:
  // Runs a normal forward over the context and fills the caches.
  // Throws InsufficientLength on a short context and ConfigError when
  // `training` is set (dropout has no streaming form).
  Stream(Model<T>& model, std::span<const int> context, bool training = false);
  Stream(Model<T>& model, const Tensor<T>& context, bool training = false);

  // Logits of the last context frame (equal to the batch forward's last column).
  const std::vector<T>& first_logits() const { return first_logits_; }

  // Feeds the next input and returns logits predicting the one after it.
  const std::vector<T>& step(int symbol);
  const std::vector<T>& step(std::span<const T> frame);

  long steps() const { return steps_; }
  // Position of the most recent input frame.
  long position() const { return next_position_ - 1; }

  // Steps on which each level 1..L recomputed. For the U-Nets the bottleneck
  // is reported separately; the baseline has no bottleneck.
  const std::vector<long>& updates_performed() const { return updates_; }
  long bottleneck_updates() const { return bottleneck_updates_; }
  // Levels fired on the most recent step.
  int last_step_levels() const { return last_levels_; }
  // Total level updates / steps. Throws if no step was taken.
  double amortized_updates() const;

  // Node recomputations, all kinds counted (a cost proxy).
  long node_evaluations() const { return node_evals_; }

 private:
  struct Ring {
    int channels = 0;
    int capacity = 1;
    long count = 0;  // frames produced so far
    long first = 0;
    long spacing = 1;
    std::vector<T> data;

    // age 0 = newest
    const T* frame(long age) const {
      const long idx = (count - 1 - age) % capacity;
      return data.data() + static_cast<std::size_t>(idx) * channels;
    }
    T* push() {
      const long idx = count % capacity;
      ++count;
      return data.data() + static_cast<std::size_t>(idx) * channels;
    }
  };

  void init(const ForwardResult<T>& fwd, const Tape<T>& tape, long context_length);
  void advance(int symbol, std::span<const T> frame);

  Model<T>* model_;
  std::vector<Ring> rings_;
  // Kernels re-laid out as [in][width][out] for conv and upsample nodes.
  std::vector<std::vector<T>> kernels_;
  std::vector<T> scratch_;
  std::vector<T> first_logits_;
  std::vector<T> logits_;
  std::vector<long> updates_;
  long bottleneck_updates_ = 0;
  int levels_ = 0;
  int last_levels_ = 0;
  long steps_ = 0;
  long next_position_ = 0;
  long node_evals_ = 0;
};

}  // namespace sequnet
