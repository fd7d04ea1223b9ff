#include "sequnet/profile.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "sequnet/codec.hpp"
#include "sequnet/stream.hpp"

namespace sequnet {

namespace {

struct RandomInput {
  std::vector<int> symbols;
  Tensor<float> frames;
};

// Symbols for embedding io, one-hot frames for linear io, sparse 0/1 rolls for pitch io.
RandomInput random_input(const ModelConfig& c, long T, std::mt19937_64& rng) {
  RandomInput in;
  if (c.io_mode == IoMode::embedding_tied) {
    std::uniform_int_distribution<int> u(0, c.vocab_size - 1);
    in.symbols.resize(T);
    for (auto& s : in.symbols) s = u(rng);
  } else if (c.io_mode == IoMode::linear) {
    std::uniform_int_distribution<int> u(0, c.in_channels - 1);
    in.frames = Tensor<float>(c.in_channels, static_cast<int>(T));
    for (long t = 0; t < T; ++t) in.frames.at(u(rng), static_cast<int>(t)) = 1.0f;
  } else {
    std::bernoulli_distribution on(0.05);
    in.frames = Tensor<float>(c.in_channels, static_cast<int>(T));
    for (auto& v : in.frames.data()) v = on(rng) ? 1.0f : 0.0f;
  }
  return in;
}

Stream<float> open_stream(Model<float>& model, std::mt19937_64& rng) {
  auto ctx = random_input(model.config(), model.min_input_length(), rng);
  if (model.config().io_mode == IoMode::embedding_tied) return Stream<float>(model, std::span<const int>(ctx.symbols));
  return Stream<float>(model, ctx.frames);
}

// One generation step: sample from `logits`, feed the sample back, and
// overwrite `logits` with the stream's next prediction.
void generate_step(Stream<float>& s, const ModelConfig& c, std::vector<float>& logits, std::vector<float>& frame,
                   std::mt19937_64& rng) {
  if (c.io_mode == IoMode::pitch_logits) {
    frame = sample_pitches(logits, 0.95, rng);
    logits = s.step(std::span<const float>(frame));
    return;
  }
  const int sym = sample_with_temperature(logits, 0.95, rng);
  if (c.io_mode == IoMode::embedding_tied) {
    logits = s.step(sym);
  } else {
    frame.assign(c.in_channels, 0.0f);
    frame[sym] = 1.0f;
    logits = s.step(std::span<const float>(frame));
  }
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

}  // namespace

long ActivationCounts::total() const {
  long n = 0;
  for (long f : frames) n += f;
  return n;
}

long ActivationCounts::channel_total() const {
  long n = 0;
  for (long f : channel_frames) n += f;
  return n;
}

ActivationCounts count_activations(Model<float>& model, long input_length, std::uint64_t seed) {
  const ModelGraph& g = model.graph();
  if (input_length < g.min_length) throw InsufficientLength(g.min_length, input_length, "count_activations");
  std::mt19937_64 rng(seed);
  auto in = random_input(g.config, input_length, rng);
  Tape<float> tape(false);
  auto fwd = g.config.io_mode == IoMode::embedding_tied
                 ? forward(model, tape, std::span<const int>(in.symbols), true, rng)
                 : forward(model, tape, in.frames, true, rng);
  ActivationCounts out;
  out.input_length = input_length;
  out.frames.assign(g.config.levels + 2, 0);
  out.channel_frames.assign(g.config.levels + 2, 0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Node& n = g.nodes[i];
    if (!n.counted) continue;
    const Tensor<float>& v = tape.value(fwd.node_vars[i]);
    out.frames.at(n.level) += v.time();
    out.channel_frames.at(n.level) += static_cast<long>(v.time()) * v.channels();
  }
  return out;
}

ActivationBound analytic_activation_bound(int levels, int stride, long input_length) {
  if (stride < 2) throw ConfigError("activation bound needs stride >= 2");
  if (levels < 0) throw ConfigError("levels must be >= 0");
  ActivationBound b;
  b.per_level.assign(levels + 2, 0.0);
  const double I = static_cast<double>(input_length);
  double scale = 1.0;  // k^(i-1)
  for (int i = 1; i <= levels; ++i) {
    b.per_level[i] = 3.0 * I / scale + I / (scale * stride);
    scale *= stride;
  }
  b.per_level[levels + 1] = I / scale;
  for (double v : b.per_level) b.series += v;
  b.cap = 4.0 * I * stride / (stride - 1);
  return b;
}

ActivationBound baseline_activation_series(int levels, long input_length) {
  ActivationBound b;
  b.per_level.assign(levels + 2, 0.0);
  for (int i = 1; i <= levels; ++i) b.per_level[i] = static_cast<double>(input_length);
  b.series = static_cast<double>(input_length) * levels;
  b.cap = b.series;
  return b;
}

UpdateCounts measure_updates(Model<float>& model, long n_steps, std::uint64_t seed) {
  if (n_steps < 1) throw ConfigError("measure_updates needs at least one step");
  const ModelConfig& c = model.config();
  std::mt19937_64 rng(seed);
  Stream<float> s = open_stream(model, rng);
  std::vector<float> logits = s.first_logits();
  std::vector<float> frame;
  for (long i = 0; i < n_steps; ++i) {
    generate_step(s, c, logits, frame, rng);
  }
  UpdateCounts u;
  u.steps = n_steps;
  u.per_level.assign(c.levels + 2, 0);
  const auto& up = s.updates_performed();
  for (std::size_t i = 0; i < up.size() && i + 1 < u.per_level.size(); ++i) u.per_level[i + 1] = up[i];
  u.per_level[c.levels + 1] = s.bottleneck_updates();
  u.amortized = s.amortized_updates();
  u.expected_per_level.assign(c.levels + 2, 0.0);
  double scale = 1.0;
  for (int i = 1; i <= c.levels; ++i) {
    const double rate = c.variant == Variant::dilated_baseline ? 1.0 : 1.0 / scale;
    u.expected += rate;
    u.expected_per_level[i] = rate * n_steps;
    scale *= c.stride;
  }
  if (c.variant != Variant::dilated_baseline) u.expected_per_level[c.levels + 1] = n_steps / scale;
  return u;
}

std::vector<BenchResult> bench_generation(const std::vector<std::pair<std::string, Model<float>*>>& models,
                                          std::uint64_t seed, long n_steps, int runs, long warmup) {
  if (n_steps <= 0) throw ConfigError("nothing to benchmark");
  if (runs < 5) throw ConfigError("benchmark needs at least 5 timed runs");
  std::vector<BenchResult> out;
  for (const auto& [name, model] : models) {
    std::mt19937_64 rng(seed);
    const ModelConfig& c = model->config();
    Stream<float> s = open_stream(*model, rng);
    std::vector<float> logits = s.first_logits();
    std::vector<float> frame;
    for (long i = 0; i < warmup; ++i) {
      generate_step(s, c, logits, frame, rng);
    }
    BenchResult r;
    r.name = name;
    for (int run = 0; run < runs; ++run) {
      const auto t0 = std::chrono::steady_clock::now();
      for (long i = 0; i < n_steps; ++i) {
        generate_step(s, c, logits, frame, rng);
      }
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      r.runs.push_back(static_cast<double>(n_steps) / std::max(dt.count(), 1e-12));
    }
    std::vector<double> sorted = r.runs;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    r.samples_per_sec = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string config_fingerprint(const ModelConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.to_text()) h = (h ^ ch) * 0x100000001b3ULL;
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

CostReport build_cost_report(Model<float>& model, long input_length, long update_steps, std::uint64_t seed) {
  const ModelConfig& c = model.config();
  CostReport r;
  r.fingerprint = config_fingerprint(c);
  r.config_text = c.to_text();
  r.input_length = input_length;
  r.levels = c.levels;
  r.stride = c.stride;
  r.activations = count_activations(model, input_length, seed);
  r.bound = c.variant == Variant::dilated_baseline ? baseline_activation_series(c.levels * c.stacks, input_length)
                                                   : analytic_activation_bound(c.levels, c.stride, input_length);
  if (c.variant == Variant::dilated_baseline && c.stacks > 1) {
    // Stacks share level indices; fold the series onto them.
    r.bound.per_level.assign(c.levels + 2, 0.0);
    for (int i = 1; i <= c.levels; ++i) r.bound.per_level[i] = static_cast<double>(input_length) * c.stacks;
  }
  r.updates = measure_updates(model, update_steps, seed);
  return r;
}

void emit_report(const CostReport& r, std::ostream& out, const std::string& format) {
  const std::size_t rows = r.activations.frames.size();
  auto label = [&](std::size_t i) {
    return i + 1 == rows ? std::string("bottleneck") : std::to_string(i);
  };
  auto expected = [&](std::size_t i) {
    return i < r.updates.expected_per_level.size() ? r.updates.expected_per_level[i] : 0.0;
  };
  long upd_total = 0;
  for (std::size_t i = 1; i + 1 < r.updates.per_level.size(); ++i) upd_total += r.updates.per_level[i];

  if (format == "csv") {
    out << "# " << kCostCsvVersion << " fingerprint=" << r.fingerprint << " input_length=" << r.input_length
        << " levels=" << r.levels << " stride=" << r.stride << " steps=" << r.updates.steps << '\n';
    out << "level,activations,bound,updates,expected_updates,channel_activations\n";
    for (std::size_t i = 1; i < rows; ++i) {
      const long upd = i < r.updates.per_level.size() ? r.updates.per_level[i] : 0;
      out << label(i) << ',' << r.activations.frames[i] << ',' << fmt(r.bound.per_level[i]) << ',' << upd << ','
          << fmt(expected(i)) << ',' << r.activations.channel_frames[i] << '\n';
    }
    out << "total," << r.activations.total() << ',' << fmt(r.bound.series) << ',' << upd_total << ','
        << fmt(r.updates.expected * r.updates.steps) << ',' << r.activations.channel_total() << '\n';
    out << "cap,," << fmt(r.bound.cap) << ",,,\n";
    if (!r.bench.empty()) {
      out << "model,samples_per_sec,speedup\n";
      for (std::size_t i = 0; i < r.bench.size(); ++i)
        out << r.bench[i].name << ',' << fmt(r.bench[i].samples_per_sec) << ',' << (i == 0 && r.bench.size() > 1 ? fmt(r.speedup) : "")
            << '\n';
    }
    return;
  }
  if (format == "markdown") {
    out << "# Cost report\n\n";
    out << "Config fingerprint: `" << r.fingerprint << "`  \n";
    out << "Input length: " << r.input_length << ", streamed steps: " << r.updates.steps << "\n\n";
    out << "| level | activations | bound | updates | expected_updates | channel_activations |\n";
    out << "|---|---:|---:|---:|---:|---:|\n";
    for (std::size_t i = 1; i < rows; ++i) {
      const long upd = i < r.updates.per_level.size() ? r.updates.per_level[i] : 0;
      out << "| " << label(i) << " | " << r.activations.frames[i] << " | " << fmt(r.bound.per_level[i]) << " | "
          << upd << " | " << fmt(expected(i)) << " | " << r.activations.channel_frames[i] << " |\n";
    }
    out << "| total | " << r.activations.total() << " | " << fmt(r.bound.series) << " | " << upd_total << " | "
        << fmt(r.updates.expected * r.updates.steps) << " | " << r.activations.channel_total() << " |\n";
    out << "| cap |  | " << fmt(r.bound.cap) << " |  |  |  |\n\n";
    out << "Amortized level updates per step: " << fmt(r.updates.amortized) << " (series " << fmt(r.updates.expected)
        << ")\n";
    if (!r.bench.empty()) {
      out << "\n| model | samples/sec |\n|---|---:|\n";
      for (const auto& b : r.bench) out << "| " << b.name << " | " << fmt(b.samples_per_sec) << " |\n";
      if (r.bench.size() > 1) out << "\nSpeedup: " << fmt(r.speedup) << "\n";
    }
    out << "\n```\n" << r.config_text << "```\n";
    return;
  }
  throw ConfigError("unknown report format: " + format);
}

void emit_report(const CostReport& report, const std::string& path, const std::string& format) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  emit_report(report, f, format);
  if (!f) throw DataError("write failed: " + path);
}

CostReport parse_csv_report(std::istream& in) {
  CostReport r;
  std::string line;
  if (!std::getline(in, line) || line.rfind(std::string("# ") + kCostCsvVersion, 0) != 0)
    throw DataError("cost report: missing or unsupported version line");
  {
    std::istringstream h(line.substr(2 + std::string(kCostCsvVersion).size()));
    std::string kv;
    while (h >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DataError("cost report: bad header field " + kv);
      const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
      if (k == "fingerprint") r.fingerprint = v;
      else if (k == "input_length") r.input_length = std::stol(v);
      else if (k == "levels") r.levels = std::stoi(v);
      else if (k == "stride") r.stride = std::stoi(v);
      else if (k == "steps") r.updates.steps = std::stol(v);
    }
  }
  if (!std::getline(in, line) || line != "level,activations,bound,updates,expected_updates,channel_activations")
    throw DataError("cost report: unexpected column header");
  const std::size_t rows = r.levels + 2;
  r.activations.input_length = r.input_length;
  r.activations.frames.assign(rows, 0);
  r.activations.channel_frames.assign(rows, 0);
  r.bound.per_level.assign(rows, 0.0);
  r.updates.per_level.assign(rows, 0);
  r.updates.expected_per_level.assign(rows, 0.0);
  bool in_bench = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.empty()) continue;
    if (f[0] == "model") {
      in_bench = true;
      continue;
    }
    if (in_bench) {
      if (f.size() < 2) throw DataError("cost report: bad bench row");
      BenchResult b;
      b.name = f[0];
      b.samples_per_sec = std::stod(f[1]);
      if (f.size() > 2 && !f[2].empty()) r.speedup = std::stod(f[2]);
      r.bench.push_back(b);
      continue;
    }
    if (f.size() != 6) throw DataError("cost report: row has " + std::to_string(f.size()) + " fields: " + line);
    if (f[0] == "cap") {
      r.bound.cap = std::stod(f[2]);
    } else if (f[0] == "total") {
      r.bound.series = std::stod(f[2]);
      if (r.updates.steps > 0) r.updates.expected = std::stod(f[4]) / r.updates.steps;
    } else {
      const std::size_t i = f[0] == "bottleneck" ? rows - 1 : std::stoul(f[0]);
      if (i == 0 || i >= rows) throw DataError("cost report: level out of range: " + f[0]);
      r.activations.frames[i] = std::stol(f[1]);
      r.bound.per_level[i] = std::stod(f[2]);
      r.updates.per_level[i] = std::stol(f[3]);
      r.updates.expected_per_level[i] = std::stod(f[4]);
      r.activations.channel_frames[i] = std::stol(f[5]);
    }
  }
  long upd = 0;
  for (std::size_t i = 1; i + 1 < rows; ++i) upd += r.updates.per_level[i];
  if (r.updates.steps > 0) r.updates.amortized = static_cast<double>(upd) / r.updates.steps;
  return r;
}

}  // namespace sequnet
