#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sequnet/model.hpp"

namespace sequnet {

// Frame counts of the counted nodes of one training-mode forward, by level.
// Index 0 is unused; 1..L are the resolution levels; L+1 is the bottleneck
// (always zero for the baseline).
struct ActivationCounts {
  long input_length = 0;
  std::vector<long> frames;
  std::vector<long> channel_frames;  // frames x channels
  long total() const;
  long channel_total() const;
};

ActivationCounts count_activations(Model<float>& model, long input_length, std::uint64_t seed = 1);

// Frame series for input length I: level i contributes 3I/k^(i-1) + I/k^i,
// the bottleneck I/k^L. `cap` is the infinite-depth limit 4Ik/(k-1) (8I at k=2).
struct ActivationBound {
  std::vector<double> per_level;  // same indexing as ActivationCounts::frames
  double series = 0.0;
  double cap = 0.0;
};

ActivationBound analytic_activation_bound(int levels, int stride, long input_length);
// I frames per baseline level.
ActivationBound baseline_activation_series(int levels, long input_length);

// Level updates of a stream driven for n_steps with random inputs.
struct UpdateCounts {
  long steps = 0;
  std::vector<long> per_level;  // index 1..L, then the bottleneck at L+1
  double amortized = 0.0;       // level 1..L updates per step
  double expected = 0.0;        // sum over i of k^-(i-1); L for the baseline
  std::vector<double> expected_per_level;
};

UpdateCounts measure_updates(Model<float>& model, long n_steps, std::uint64_t seed = 1);

struct BenchResult {
  std::string name;
  double samples_per_sec = 0.0;
  std::vector<double> runs;
};

// Streaming generation speed at batch 1. Each model gets `warmup` untimed
// steps, then `runs` timed runs of n_steps; the median rate is reported.
std::vector<BenchResult> bench_generation(const std::vector<std::pair<std::string, Model<float>*>>& models,
                                          std::uint64_t seed, long n_steps, int runs = 5, long warmup = 16);

struct CostReport {
  std::string fingerprint;
  std::string config_text;
  long input_length = 0;
  int levels = 0;
  int stride = 2;
  ActivationCounts activations;
  ActivationBound bound;
  UpdateCounts updates;
  std::vector<BenchResult> bench;
  double speedup = 0.0;  // bench[0] / bench[1] when two models were timed
};

// FNV-1a of the canonical config text, as 16 hex digits.
std::string config_fingerprint(const ModelConfig& config);

CostReport build_cost_report(Model<float>& model, long input_length, long update_steps, std::uint64_t seed);

inline constexpr const char* kCostCsvVersion = "sequnet-cost-report v1";

void emit_report(const CostReport& report, std::ostream& out, const std::string& format);
void emit_report(const CostReport& report, const std::string& path, const std::string& format);
// Reads back what emit_report wrote as csv (timing runs are not kept).
CostReport parse_csv_report(std::istream& in);

}  // namespace sequnet
