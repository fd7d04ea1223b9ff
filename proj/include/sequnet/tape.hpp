#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sequnet/tensor.hpp"

namespace sequnet {

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Ordered record of executed differentiable operations. Backward replays the
// recorded closures in exact reverse execution order. A tape is single-use:
// a second backward() throws StaleTape.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  explicit Tape(bool recording = true) : recording_(recording) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  // Non-recording tapes keep values only; no closures, no gradients.
  bool recording() const { return recording_; }

  Var leaf(Tensor<T> value) { return record(std::move(value), nullptr); }

  Var record(Tensor<T> value, Backward backward) {
    Node n;
    n.value = std::move(value);
    if (recording_) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor<T>& value(Var v) const { return nodes_.at(v.id).value; }

  // Gradient accumulator, zero-initialised on first access.
  Tensor<T>& grad(Var v) {
    Node& n = nodes_.at(v.id);
    if (!n.has_grad) {
      n.grad = Tensor<T>(n.value.channels(), n.value.time());
      n.has_grad = true;
    }
    return n.grad;
  }
  bool has_grad(Var v) const { return nodes_.at(v.id).has_grad; }

  T scalar(Var v) const {
    const auto& t = value(v);
    if (t.size() != 1) throw ShapeError("scalar() on a non-scalar tensor");
    return t.data()[0];
  }

  void backward(Var loss, T seed = T(1)) {
    if (!recording_) throw Error("backward on a non-recording tape");
    if (consumed_) throw StaleTape();
    if (value(loss).size() != 1) throw ShapeError("backward() needs a scalar loss");
    consumed_ = true;
    grad(loss).data()[0] = seed;
    visit_order_.clear();
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.has_grad || !n.backward) continue;
      visit_order_.push_back(id);
      // The closure may append to other nodes' grads but never to this vector.
      auto fn = n.backward;
      fn(*this);
    }
  }

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<int>& backward_order() const { return visit_order_; }

  // Folds the sign pattern of a kinked activation's input into a running hash.
  void mix_kinks(const Tensor<T>& pre) {
    for (const T& v : pre.data()) {
      kink_hash_ = (kink_hash_ ^ static_cast<std::uint64_t>(v < T(0))) * 0x100000001b3ULL;
    }
  }
  std::uint64_t kink_signature() const { return kink_hash_; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool has_grad = false;
    Backward backward;
  };

  bool recording_ = true;
  bool consumed_ = false;
  std::vector<Node> nodes_;
  std::vector<int> visit_order_;
  std::uint64_t kink_hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace sequnet
