// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "sequnet/checkpoint.hpp"
#include "sequnet/codec.hpp"
#include "sequnet/generate.hpp"
#include "sequnet/gradcheck_suite.hpp"
#include "sequnet/metrics.hpp"
#include "sequnet/optim.hpp"
#include "sequnet/profile.hpp"
#include "sequnet/run_config.hpp"
#include "sequnet/trainer.hpp"
#include "test_util.hpp"

using namespace sequnet;
using sequnet::testing::pick;
using sequnet::testing::random_symbols;
using sequnet::testing::random_tensor;
using sequnet::testing::small_config;
using sequnet::testing::source_path;
using sequnet::testing::stream_vs_naive;

namespace {

constexpr double kGradTolerance = 1e-5;
constexpr int kGradInstances = 20;
constexpr double kGradSeconds = 120.0;
constexpr int kCausalTrials = 200;
constexpr double kStreamTolerance = 1e-5;
constexpr long kStreamSteps = 100;
constexpr double kUpdateTolerance = 0.05;
constexpr double kStrideTwoUpdateCap = 2.0;
constexpr double kSpeedupFloor = 2.0;
constexpr long kMatchedField = 4096;
constexpr double kPeriodicBpc = 0.1;
constexpr long kPeriodicSteps = 2000;
constexpr int kDeskEpochs = 30;
constexpr double kRunSeconds = 15 * 60.0;
constexpr double kParamTolerance = 0.10;

// Published parameter counts of the reference configurations.
const std::map<std::string, long> kPublishedParams = {
    {"char-lm-sequnet", 5'900'000},    {"char-lm-tcn", 5'900'000},       {"word-lm-sequnet", 14'900'000},
    {"word-lm-tcn", 14'700'000},       {"music-muse-sequnet", 1'700'000}, {"music-muse-tcn", 1'700'000},
    {"music-nott-sequnet", 1'700'000}, {"music-nott-tcn", 1'700'000},     {"music-jsb-sequnet", 522'000},
    {"music-jsb-tcn", 534'000},
};

constexpr Variant kVariants[] = {Variant::plain, Variant::residual, Variant::dilated_baseline};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

class Clock {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

long ipow(long b, int e) {
  long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void note(const std::string& line) { std::printf("  %s\n", line.c_str()); }

void gradients(Outcome& o) {
  Clock clock;
  const auto entries = run_gradcheck_suite(kGradInstances, 1, kGradTolerance);
  double worst = 0.0;
  for (const auto& e : entries) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s n=%d max_rel=%.2e", e.name.c_str(), e.instances, e.max_rel_error);
    note(buf);
    o.require(e.passed && e.max_rel_error < kGradTolerance, e.name + " " + e.worst);
    o.require(e.instances >= kGradInstances, e.name + " ran too few instances");
    worst = std::max(worst, e.max_rel_error);
  }
  const double t = clock.seconds();
  o.require(t < kGradSeconds, "runtime");
  o.detail << entries.size() << " checks, worst relative error " << worst << ", " << t << " s";
}

Model<double> biased_double_model(const ModelConfig& c, std::uint64_t seed) {
  auto m = build_model(c, seed).cast<double>();
  std::mt19937_64 rng(seed + 1);
  for (auto* p : m.params().pointers())
    if (p->name.ends_with(".bias")) p->value = random_tensor<double>(1, static_cast<int>(p->size()), rng, 0.5).data();
  return m;
}

void causality(Outcome& o) {
  std::mt19937_64 rng(11);
  long frames = 0;
  std::map<std::string, int> per_variant;
  for (int trial = 0; trial < kCausalTrials; ++trial) {
    const Variant v = kVariants[trial % 3];
    auto cfg = small_config(v, pick(rng, 1, 4), pick(rng, 2, 3), pick(rng, 1, 5), rng);
    auto m = biased_double_model(cfg, 1000 + trial);
    const auto& g = m.graph();
    const long T = g.min_length + pick(rng, 0, 2 * static_cast<int>(g.phase_period()));
    auto x = random_tensor<double>(cfg.in_channels, static_cast<int>(T), rng);
    const auto base = predict(m, x);
    const Grid out = g.schedule(T)[g.output];
    // Inside the output span, so every trial has earlier frames to compare.
    const int t = pick(rng, static_cast<int>(std::min(out.position(0) + 1, T - 1)), static_cast<int>(T - 1));
    x.at(pick(rng, 0, cfg.in_channels - 1), t) += std::normal_distribution<double>(0.0, 1.0)(rng);
    const auto moved = predict(m, x);
    for (long j = 0; j < out.length; ++j) {
      if (out.position(j) >= t) continue;
      for (int c = 0; c < base.channels(); ++c) {
        o.require(moved.at(c, static_cast<int>(j)) == base.at(c, static_cast<int>(j)),
                  "trial " + std::to_string(trial) + " frame " + std::to_string(j));
        ++frames;
      }
    }
    ++per_variant[to_string(v)];
  }
  o.detail << kCausalTrials << " trials (";
  for (const auto& [k, n] : per_variant) o.detail << k << " " << n << " ";
  o.detail << "), " << frames << " earlier output values compared bitwise";
}

void streaming(Outcome& o) {
  std::mt19937_64 rng(12);
  double worst = 0.0;
  int configs = 0;
  auto run = [&](ModelConfig cfg, bool symbolic) {
    if (symbolic) {
      cfg.io_mode = IoMode::embedding_tied;
      cfg.vocab_size = 9;
      cfg.embedding_dim = 3;
    }
    auto m = build_model(cfg, 100 + configs);
    const double d = stream_vs_naive(m, kStreamSteps, rng);
    o.require(d <= kStreamTolerance, to_string(cfg.variant) + " L=" + std::to_string(cfg.levels) +
                                         " k=" + std::to_string(cfg.stride) + " W=" + std::to_string(cfg.filter_width));
    worst = std::max(worst, d);
    ++configs;
  };
  for (Variant v : kVariants)
    for (int L = 1; L <= 4; ++L)
      for (int k : {2, 3})
        for (int W : {2, 3, 5}) run(small_config(v, L, k, W, rng), (L + k + W) % 2 == 0);
  {
    auto deep = small_config(Variant::residual, 8, 2, 3, rng);
    deep.depth = 1;
    run(deep, false);
  }
  note("teacher-forced configs: " + std::to_string(configs));

  int generations = 0;
  for (Variant v : kVariants)
    for (int L : {1, 3}) {
      auto cfg = small_config(v, L, 2, 3, rng);
      cfg.io_mode = IoMode::embedding_tied;
      cfg.vocab_size = 7;
      cfg.embedding_dim = 4;
      auto m = build_model(cfg, 200 + L);
      const auto seed = random_symbols(m.min_input_length() + pick(rng, 0, 5), 7, rng);
      std::mt19937_64 a(L), b(L);
      o.require(generate_symbols(m, seed, kStreamSteps, 0.95, a) ==
                    generate_symbols(m, seed, kStreamSteps, 0.95, b, true),
                "symbol generation " + to_string(v));

      auto roll = small_config(v, L, 2, 3, rng);
      roll.io_mode = IoMode::pitch_logits;
      roll.in_channels = roll.out_channels = 12;
      auto pm = build_model(roll, 300 + L);
      PianoRoll rs(12, static_cast<int>(pm.min_input_length() + 2));
      for (int t = 0; t < rs.time(); ++t) rs.at(pick(rng, 0, 11), t) = 1.0f;
      std::mt19937_64 c(L), d(L);
      o.require(generate_frames(pm, rs, kStreamSteps, 0.95, c) == generate_frames(pm, rs, kStreamSteps, 0.95, d, true),
                "frame generation " + to_string(v));
      generations += 2;
    }
  o.detail << configs << " configs x " << kStreamSteps << " steps, max |stream - naive| " << worst << "; "
           << generations << " generations identical under shared seeds";
}

ModelConfig counting_config(Variant v, int L, int k, int W) {
  ModelConfig c;
  c.variant = v;
  c.levels = L;
  c.stride = k;
  c.filter_width = W;
  c.hidden = 2;
  c.residual_features = 2;
  if (v == Variant::residual) c.depth = 1;
  return c;
}

void complexity(Outcome& o) {
  int exact = 0;
  for (Variant v : {Variant::plain, Variant::residual})
    for (int L = 1; L <= 5; ++L)
      for (int k : {2, 3}) {
        auto m = build_model(counting_config(v, L, k, 1), 1);
        const long p = ipow(k, L);
        const long first = (m.min_input_length() + p - 1) / p * p;
        for (long I : {first, first + p, first + 4 * p}) {
          const auto a = count_activations(m, I);
          const auto b = analytic_activation_bound(L, k, I);
          bool same = true;
          for (int i = 1; i <= L + 1; ++i) same = same && static_cast<double>(a.frames[i]) == b.per_level[i];
          o.require(same, to_string(v) + " L=" + std::to_string(L) + " k=" + std::to_string(k) + " I=" + std::to_string(I));
          ++exact;
        }
      }
  double worst_ratio = 0.0;
  for (int W : {1, 2, 3, 5})
    for (int L = 1; L <= 10; ++L) {
      auto m = build_model(counting_config(Variant::plain, L, 2, W), 1);
      const long p = ipow(2, L);
      const long I = (m.min_input_length() + p - 1) / p * p;
      const auto a = count_activations(m, I);
      worst_ratio = std::max(worst_ratio, static_cast<double>(a.total()) / I);
      o.require(a.total() <= 8 * I, "cap at W=" + std::to_string(W) + " L=" + std::to_string(L));
    }
  // Valid convolutions trim frames, so I*L is exact at W=1 and an upper bound above it.
  for (int W : {1, 2, 3})
    for (int L = 1; L <= 8; ++L) {
      auto m = build_model(counting_config(Variant::dilated_baseline, L, 2, W), 1);
      for (long I : {m.min_input_length(), m.min_input_length() + 37, m.min_input_length() + 256}) {
        const long n = count_activations(m, I).total();
        o.require(W == 1 ? n == I * L : n <= I * L, "baseline W=" + std::to_string(W) + " L=" + std::to_string(L));
        o.require(baseline_activation_series(L, I).series == static_cast<double>(I * L), "baseline series");
      }
    }
  auto anchor = build_model(counting_config(Variant::plain, 2, 2, 1), 1);
  const long got = count_activations(anchor, 16).total();
  const auto bound = analytic_activation_bound(2, 2, 16);
  o.require(got == 88 && bound.series == 88.0 && bound.cap == 128.0, "anchor");
  o.detail << exact << " exact series matches; max frames/I " << worst_ratio << " (cap 8); baseline I*L exact at W=1 and bounding W 2-3 for L 1-8; anchor "
           << got << " <= " << bound.cap;
}

void update_rates(Outcome& o) {
  double worst = 0.0;
  double max_amortized = 0.0;
  int runs = 0;
  for (int k : {2, 3})
    for (int L = 1; L <= (k == 2 ? 8 : 5); ++L) {
      auto m = build_model(counting_config(Variant::plain, L, k, 2), 1);
      const auto u = measure_updates(m, 10 * ipow(k, L));
      double want = 0.0;
      for (int i = 1; i <= L; ++i) want += 1.0 / static_cast<double>(ipow(k, i - 1));
      const double rel = std::abs(u.amortized - want) / want;
      worst = std::max(worst, rel);
      o.require(rel <= kUpdateTolerance, "k=" + std::to_string(k) + " L=" + std::to_string(L));
      if (k == 2) {
        max_amortized = std::max(max_amortized, u.amortized);
        o.require(u.amortized <= kStrideTwoUpdateCap, "stride two cap at L=" + std::to_string(L));
      }
      ++runs;
    }
  o.detail << runs << " configs, worst relative deviation " << worst << ", max k=2 amortized " << max_amortized;
}

ModelConfig bench_config(Variant v, int levels) {
  ModelConfig c;
  c.variant = v;
  c.levels = levels;
  c.filter_width = 2;
  c.hidden = 128;
  c.io_mode = IoMode::linear;
  c.in_channels = 256;
  c.out_channels = 256;
  return c;
}

void speed(Outcome& o) {
  double prev = 0.0;
  double at_matched = 0.0;
  long matched_gap = -1;
  for (int L : {4, 6, 8, 10}) {
    const auto unet_cfg = bench_config(Variant::plain, L);
    const long rf = build_graph(unet_cfg).receptive_field();
    // Baseline depth with the nearest receptive field.
    int best_levels = 1;
    long best_gap = -1;
    for (int lb = 1; lb <= 16; ++lb) {
      const long gap = std::abs(build_graph(bench_config(Variant::dilated_baseline, lb)).receptive_field() - rf);
      if (best_gap < 0 || gap < best_gap) {
        best_gap = gap;
        best_levels = lb;
      }
    }
    const auto base_cfg = bench_config(Variant::dilated_baseline, best_levels);
    auto unet = build_model(unet_cfg, 1);
    auto base = build_model(base_cfg, 1);
    const auto r = bench_generation({{"unet", &unet}, {"baseline", &base}}, 1, 400, 5, 50);
    const double ratio = r[0].samples_per_sec / r[1].samples_per_sec;
    char buf[200];
    std::snprintf(buf, sizeof buf, "L=%-2d rf=%-5ld baseline levels=%-2d rf=%-5ld  %8.1f vs %8.1f samples/s  ratio %.2f", L,
                  rf, best_levels, build_graph(base_cfg).receptive_field(), r[0].samples_per_sec, r[1].samples_per_sec,
                  ratio);
    note(buf);
    o.require(ratio >= prev, "speedup decreased at L=" + std::to_string(L));
    prev = ratio;
    const long gap = std::abs(rf - kMatchedField);
    if (matched_gap < 0 || gap < matched_gap) {
      matched_gap = gap;
      at_matched = ratio;
    }
  }
  o.require(at_matched > kSpeedupFloor, "speedup at the matched field");
  o.detail << "speedup " << at_matched << " at receptive field nearest " << kMatchedField << ", non-decreasing in L";
}

double unigram_entropy_bits(const SequenceSet& s) {
  std::map<int, double> count;
  double n = 0.0;
  for (const auto& seq : s.symbols)
    for (int x : seq) {
      count[x] += 1.0;
      n += 1.0;
    }
  double h = 0.0;
  for (const auto& [sym, c] : count) h -= c / n * std::log2(c / n);
  return h;
}

// Frame perplexity of independent per-pitch Bernoulli marginals fitted on `s` itself.
double marginal_frame_ppl(const SequenceSet& s) {
  const int P = s.rolls.front().channels();
  std::vector<double> on(P, 0.0);
  double frames = 0.0;
  for (const auto& r : s.rolls)
    for (int t = 0; t < r.time(); ++t) {
      frames += 1.0;
      for (int p = 0; p < P; ++p) on[p] += r.at(p, t);
    }
  double nll = 0.0;
  for (int p = 0; p < P; ++p) {
    const double q = std::clamp(on[p] / frames, 1e-6, 1.0 - 1e-6);
    nll -= on[p] * std::log(q) + (frames - on[p]) * std::log(1.0 - q);
  }
  return std::exp(nll / frames);
}

void learning(Outcome& o) {
  {
    Clock clock;
    TaskSpec ts;
    ts.period = 16;
    ts.period_vocab = 8;
    ts.period_length = 4096;
    ModelConfig c;
    c.levels = 2;
    c.filter_width = 3;
    c.hidden = 16;
    c.io_mode = IoMode::embedding_tied;
    c.vocab_size = 8;
    c.embedding_dim = 16;
    TrainConfig tc;
    tc.learning_rate = 0.003;
    tc.batch_size = 8;
    tc.target_span = 32;
    tc.steps_per_epoch = 100;
    tc.max_epochs = 100;
    tc.patience = 100;
    tc.max_steps = kPeriodicSteps;
    tc.target_metric = kPeriodicBpc;
    const auto task = load_task(ts, 1);
    auto m = build_model(c, 1);
    const auto r = train_model(m, task, tc, "");
    const double t = clock.seconds();
    o.require(r.best_valid < kPeriodicBpc && r.steps <= kPeriodicSteps && t < kRunSeconds, "periodic");
    o.detail << "periodic " << r.best_valid << " bpc after " << r.steps << " steps (" << t << " s); ";
  }
  {
    Clock clock;
    TaskSpec ts;
    ts.train_path = source_path("data/tiny_prose.txt");
    ModelConfig c;
    c.levels = 3;
    c.filter_width = 3;
    c.hidden = 64;
    c.dropout = 0.1;
    c.io_mode = IoMode::embedding_tied;
    c.vocab_size = 256;
    c.embedding_dim = 32;
    TrainConfig tc;
    tc.learning_rate = 0.003;
    tc.batch_size = 16;
    tc.target_span = 64;
    tc.max_epochs = kDeskEpochs;
    tc.patience = 5;
    const auto task = load_task(ts, 1);
    auto m = build_model(c, 1);
    const auto r = train_model(m, task, tc, "");
    const double t = clock.seconds();
    const double unigram = unigram_entropy_bits(task.test);
    const double test = r.test_metric.value_or(INFINITY);
    o.require(test < unigram && t < kRunSeconds, "char model");
    o.detail << "char test " << test << " bpc vs unigram " << unigram << " (" << r.history.size() << " epochs, " << t
             << " s); ";
  }
  {
    Clock clock;
    TaskSpec ts;
    ts.kind = TaskKind::pianoroll;
    ts.train_path = source_path("data/pianoroll_tiny.json");
    ModelConfig c;
    c.levels = 2;
    c.filter_width = 3;
    c.hidden = 64;
    c.dropout = 0.1;
    c.io_mode = IoMode::pitch_logits;
    c.in_channels = c.out_channels = kPianoPitches;
    TrainConfig tc;
    tc.learning_rate = 0.003;
    tc.batch_size = 4;
    tc.target_span = 0;
    tc.max_epochs = kDeskEpochs;
    tc.patience = 5;
    const auto task = load_task(ts, 1);
    auto m = build_model(c, 1);
    const auto r = train_model(m, task, tc, "");
    const double t = clock.seconds();
    const double marginal = marginal_frame_ppl(task.test);
    const double test = r.test_metric.value_or(INFINITY);
    o.require(test < marginal && t < kRunSeconds, "piano roll model");
    o.detail << "piano test frame ppl " << test << " vs marginal " << marginal << " (" << t << " s)";
  }
}

void protocol(Outcome& o) {
  {
    PlateauSchedule s(0.00073, 5);
    for (int e = 1; e <= 11; ++e) s.on_epoch_end(5.0 - e * 0.1, e);
    std::vector<double> trace;
    for (int e = 12; e <= 21; ++e) trace.push_back(s.on_epoch_end(9.0, e));
    const std::vector<double> want{0.00073, 0.00073, 0.00073, 0.00073, 0.000365,
                                   0.000365, 0.000365, 0.000365, 0.000365, 0.0001825};
    o.require(trace == want, "plateau trace after a stall");
    PlateauSchedule g(0.00073, 5);
    g.on_epoch_end(1.0, 1);
    bool held = true;
    for (int e = 2; e <= 10; ++e) held = held && g.on_epoch_end(2.0, e) == 0.00073;
    o.require(held && g.on_epoch_end(2.0, 11) == 0.000365, "no halving before epoch 11");
    PlateauSchedule f(0.00073, 5);
    bool flat = true;
    for (int e = 1; e <= 40; ++e) flat = flat && f.on_epoch_end(10.0 - e * 0.1, e) == 0.00073;
    o.require(flat, "improving run keeps its rate");
  }
  {
    o.require(mu_law_encode(-1.0) == 0 && mu_law_encode(1.0) == 255, "mu-law endpoints");
    auto expand = [](double y) { return std::copysign((std::pow(256.0, std::abs(y)) - 1.0) / 255.0, y); };
    const int n = 10000;
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = -1.0 + 2.0 * i / n;
      const int c = mu_law_encode(x);
      const double centre = 2.0 * c / 255.0 - 1.0;
      const double lo = expand(std::max(-1.0, centre - 1.0 / 255.0));
      const double hi = expand(std::min(1.0, centre + 1.0 / 255.0));
      const double back = mu_law_decode(c);
      const double err = std::abs(back - x);
      worst = std::max(worst, err);
      o.require(err <= std::max(back - lo, hi - back) + 1e-12, "mu-law bin bound at x=" + std::to_string(x));
    }
    o.detail << "plateau traces exact; mu-law max round-trip error " << worst << " over " << n + 1 << " points; ";
  }
  {
    std::mt19937_64 rng(13);
    int models = 0;
    for (Variant v : kVariants) {
      auto cfg = small_config(v, 2, 2, 3, rng);
      cfg.io_mode = IoMode::embedding_tied;
      cfg.vocab_size = 11;
      cfg.embedding_dim = 4;
      auto m = build_model(cfg, 5);
      OptimizerSection opt;
      opt.step = 3;
      opt.learning_rate = 0.001;
      for (std::size_t i = 0; i < m.params().size(); ++i) {
        opt.first_moment.push_back(m.params()[i].value);
        opt.second_moment.push_back(m.params()[i].value);
      }
      const auto bytes = serialize_checkpoint(m, &opt);
      const auto path = (std::filesystem::temp_directory_path() / "sequnet_acceptance.ckpt").string();
      save_checkpoint(path, m, &opt);
      const auto back = load_checkpoint(path);
      auto m2 = model_from_checkpoint(back);
      o.require(serialize_checkpoint(m2, &*back.optimizer) == bytes, "checkpoint bytes " + to_string(v));
      const auto sym = random_symbols(m.min_input_length() + 4, 11, rng);
      o.require(predict(m2, std::span<const int>(sym)) == predict(m, std::span<const int>(sym)),
                "checkpoint outputs " + to_string(v));
      std::filesystem::remove(path);
      ++models;
    }
    o.detail << models << " checkpoints round-trip bitwise";
  }
}

void presets(Outcome& o) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(source_path("presets")))
    if (e.path().extension() == ".cfg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  int reconciled = 0;
  for (const auto& f : files) {
    const std::string name = f.stem().string();
    long count = 0;
    long rf = 0;
    try {
      const auto rc = RunConfig::load(f.string());
      rc.validate();
      const auto m = build_model(rc.model, 1);
      count = m.params().element_count();
      rf = m.graph().receptive_field();
    } catch (const std::exception& e) {
      o.require(false, name + ": " + e.what());
      continue;
    }
    char buf[200];
    const auto it = kPublishedParams.find(name);
    if (it == kPublishedParams.end()) {
      std::snprintf(buf, sizeof buf, "%-20s %11ld params  rf %-6ld (no published count)", name.c_str(), count, rf);
    } else {
      const double dev = static_cast<double>(count - it->second) / static_cast<double>(it->second);
      std::snprintf(buf, sizeof buf, "%-20s %11ld params  rf %-6ld published %9ld  %+5.1f%%", name.c_str(), count, rf,
                    it->second, 100.0 * dev);
      o.require(std::abs(dev) <= kParamTolerance, name + " parameter count");
      ++reconciled;
    }
    note(buf);
  }
  o.require(files.size() == 12, "expected 12 presets");
  o.detail << files.size() << " presets built, " << reconciled << " reconciled within "
           << static_cast<int>(kParamTolerance * 100) << "%";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"gradient correctness", gradients},
      {"causality", causality},
      {"streaming equals batch", streaming},
      {"activation counts", complexity},
      {"update rates", update_rates},
      {"generation speed trend", speed},
      {"learning sanity", learning},
      {"protocol fidelity", protocol},
      {"config fidelity", presets},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    Clock clock;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.str().c_str(),
                clock.seconds());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed;
}
