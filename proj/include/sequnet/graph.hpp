#pragma once

#include <string>
#include <vector>

#include "sequnet/config.hpp"

namespace sequnet {

// Every feature frame carries the position (input index) of the latest input
// frame it can see. A tensor's frames sit on an arithmetic lattice.
struct Grid {
  long first = 0;
  long spacing = 1;
  long length = 0;

  long last() const { return first + (length - 1) * spacing; }
  long position(long j) const { return first + j * spacing; }
  bool operator==(const Grid&) const = default;
};

enum class OpKind {
  input,
  embed,
  conv,
  upsample,
  leaky_relu,
  dropout,
  gate,
  add,
  concat,
  crop_to,
  decimate,
  repeat,
  tied_projection,
};

const char* to_string(OpKind k);

// One operation of the built network.
//
// upsample: transposed conv of `a` (coarse), aligned to shortcut `ref`; the
//   first width-1 full-transposed frames are dropped.
// crop_to: frames of `a` from ref's first position on.
// decimate: frames of `a` at ref's positions.
// repeat: for each position of `ref`, the latest frame of `a` at or before it.
struct Node {
  OpKind kind = OpKind::input;
  int a = -1;
  int b = -1;
  int ref = -1;
  int kernel = -1;
  int bias = -1;
  int width = 1;
  int stride = 1;
  int dilation = 1;
  int channels = 0;
  // log_k of the frame spacing.
  int rate = 0;
  // Block level for activation reporting: 0 = io/output, 1..L, L+1 = bottleneck.
  int level = 0;
  // Level whose clock drives this node in streaming; 0 = every step, uncounted.
  int clock_level = 0;
  int block = 0;
  bool counted = false;
  double dropout = 0.0;
  std::string name;
};

enum class Init { kaiming_uniform, zeros, embedding };

struct ParamSpec {
  std::string name;
  std::vector<int> shape;
  int fan_in = 1;
  Init init = Init::zeros;
  int block = 0;
};

// Built, wired block graph. Node ids are a topological order.
struct ModelGraph {
  ModelConfig config;
  std::vector<Node> nodes;
  std::vector<ParamSpec> params;
  int input = 0;
  int output = -1;
  int embedding = -1;  // param index of the tied table
  // (shortcut tap node, node that consumes it)
  std::vector<std::pair<int, int>> shortcuts;
  int num_blocks = 0;
  long min_length = 0;

  // Frame lattice of every node for an input of T frames. Nodes that cannot
  // be formed get length <= 0; feasible() says whether all are >= 1.
  std::vector<Grid> schedule(long T) const;
  bool feasible(long T) const;
  long count_parameters() const;

  // Earliest input index each output frame depends on (-1 for none), by
  // exact index propagation through the schedule for an input of T frames.
  std::vector<long> earliest_dependency(long T) const;

  // Largest (position - earliest dependency + 1) over a full phase cycle of
  // output frames, taken far enough from the sequence start to be untruncated.
  long receptive_field() const;

  // Number of distinct output phases (k^L for U-Nets, 1 for the baseline).
  long phase_period() const;
  int max_clock_level() const;
};

ModelGraph build_graph(const ModelConfig& config);

long receptive_field_analytic(const ModelConfig& config);
long min_input_length(const ModelConfig& config);

}  // namespace sequnet
