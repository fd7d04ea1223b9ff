#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "sequnet/graph.hpp"
#include "sequnet/ops.hpp"

namespace sequnet {

// A built graph plus its parameters. Kernels are optionally weight-normalised:
// the stored "<role>.kernel" is the direction v and "<role>.gain" the per-output
// gain g, and the kernel seen by the ops is g * v / ||v||.
template <typename T>
class Model {
 public:
  Model(ModelGraph graph, ParameterStore<T> store);
  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ModelGraph& graph() const { return graph_; }
  const ModelConfig& config() const { return graph_.config; }
  long min_input_length() const { return graph_.min_length; }

  ParameterStore<T>& params() { return store_; }
  const ParameterStore<T>& params() const { return store_; }

  // Stored parameter behind a spec index.
  Parameter<T>& stored(int spec) { return *by_spec_[spec]; }
  // Parameter the forward pass reads (the derived kernel under weight norm).
  Parameter<T>& effective(int spec);

  // Recomputes derived kernels; call before a forward when weights changed.
  void refresh();
  // Moves gradients of derived kernels into v and g; call after backward.
  void pull_gradients();

  template <typename U>
  Model<U> cast() const {
    Model<U> out(graph_, store_.template cast<U>());
    out.refresh();
    return out;
  }

 private:
  void bind();

  ModelGraph graph_;
  ParameterStore<T> store_;
  std::vector<Parameter<T>*> by_spec_;
  std::vector<Parameter<T>*> gain_;
  std::vector<std::unique_ptr<Parameter<T>>> derived_;
};

// Deterministic, seeded construction. Kernels are fan-in scaled uniform with
// LeakyReLU gain; biases zero; embedding rows uniform with unit mean square norm.
Model<float> build_model(const ModelConfig& config, std::uint64_t seed);

template <typename T>
struct ForwardResult {
  Var logits;
  Grid output_grid;
  std::vector<Var> node_vars;
  std::vector<Grid> grids;
};

// One pass over the graph. `symbols` for embedding io, `frames` otherwise.
// Output frame j sits at input position output_grid.position(j) and predicts
// the input frame right after it.
template <typename T>
ForwardResult<T> forward(Model<T>& model, Tape<T>& tape, std::span<const int> symbols, bool training,
                         std::mt19937_64& rng);
template <typename T>
ForwardResult<T> forward(Model<T>& model, Tape<T>& tape, const Tensor<T>& frames, bool training,
                         std::mt19937_64& rng);

// Eval-mode logits on a throwaway non-recording tape.
template <typename T>
Tensor<T> predict(Model<T>& model, std::span<const int> symbols);
template <typename T>
Tensor<T> predict(Model<T>& model, const Tensor<T>& frames);

// Smallest R such that no input frame more than R-1 steps before an output
// frame's position influences that frame. Influence is the input-frame
// sensitivity from a backward pass at a random input, over a full phase cycle
// of output frames; finite perturbations vanish below double resolution after
// a few dozen gated layers, infinitesimal ones do not.
long receptive_field_empirical(Model<double>& model, std::uint64_t seed);

}  // namespace sequnet
