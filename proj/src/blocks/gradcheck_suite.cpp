#include "sequnet/gradcheck_suite.hpp"

#include <functional>
#include <memory>

#include "sequnet/gradcheck.hpp"
#include "sequnet/model.hpp"

namespace sequnet {

namespace {

using Rng = std::mt19937_64;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void fill_normal(std::vector<double>& v, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto& x : v) x = n(rng);
}

Tensor<double> random_tensor(int c, int t, Rng& rng) {
  Tensor<double> out(c, t);
  fill_normal(out.data(), rng);
  return out;
}

// Parameters owned by one op instance plus the loss that exercises it.
struct Case {
  std::vector<std::unique_ptr<Parameter<double>>> owned;
  LossBuilder loss;

  Parameter<double>& param(const std::string& name, std::vector<int> shape, Rng& rng, double scale = 1.0) {
    owned.push_back(std::make_unique<Parameter<double>>(name, std::move(shape)));
    fill_normal(owned.back()->value, rng, scale);
    return *owned.back();
  }
  std::vector<Parameter<double>*> pointers() {
    std::vector<Parameter<double>*> out;
    for (auto& p : owned) out.push_back(p.get());
    return out;
  }
};

// Leaf over a [c x t] parameter.
Var leaf(Tape<double>& tape, Parameter<double>& p) { return parameter_leaf(tape, p, p.shape[0], p.shape[1]); }

// Scalar probe: random-weighted sum of every output element.
Var probe(Tape<double>& tape, Var y, std::uint64_t seed) {
  const Tensor<double>& v = tape.value(y);
  Rng rng(seed);
  return weighted_sum(tape, y, random_tensor(v.channels(), v.time(), rng));
}

using CaseFactory = std::function<void(Case&, Rng&)>;

std::vector<std::pair<std::string, CaseFactory>> op_cases() {
  std::vector<std::pair<std::string, CaseFactory>> f;
  f.emplace_back("conv1d_valid", [](Case& c, Rng& rng) {
    const int ci = pick(rng, 1, 3), co = pick(rng, 1, 3), w = pick(rng, 1, 4), s = pick(rng, 1, 3), d = pick(rng, 1, 3);
    const int t = (w - 1) * d + 1 + pick(rng, 0, 6);
    auto& x = c.param("x", {ci, t}, rng);
    auto& k = c.param("kernel", {co, ci, w}, rng);
    auto& b = c.param("bias", {co}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, &k, &b, s, d, ps](Tape<double>& tp) { return probe(tp, conv1d_valid(tp, leaf(tp, x), k, b, s, d), ps); };
  });
  f.emplace_back("conv1d_transposed", [](Case& c, Rng& rng) {
    const int ci = pick(rng, 1, 3), co = pick(rng, 1, 3), w = pick(rng, 1, 5), s = pick(rng, 1, 3);
    const int t = pick(rng, 1, 5);
    auto& x = c.param("x", {ci, t}, rng);
    auto& k = c.param("kernel", {co, ci, w}, rng);
    auto& b = c.param("bias", {co}, rng);
    std::optional<int> out_time;
    if (pick(rng, 0, 1)) out_time = pick(rng, 1, (t - 1) * s + w + 3);
    const std::uint64_t ps = rng();
    c.loss = [&x, &k, &b, s, out_time, ps](Tape<double>& tp) {
      return probe(tp, conv1d_transposed(tp, leaf(tp, x), k, b, s, out_time), ps);
    };
  });
  f.emplace_back("crop_front", [](Case& c, Rng& rng) {
    const int t = pick(rng, 1, 8), n = pick(rng, 0, t - 1);
    auto& x = c.param("x", {pick(rng, 1, 3), t}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, n, ps](Tape<double>& tp) { return probe(tp, crop_front(tp, leaf(tp, x), n), ps); };
  });
  f.emplace_back("gather_frames", [](Case& c, Rng& rng) {
    const int t = pick(rng, 1, 6);
    std::vector<int> idx(pick(rng, 1, 10));
    for (auto& i : idx) i = pick(rng, 0, t - 1);
    auto& x = c.param("x", {pick(rng, 1, 3), t}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, idx, ps](Tape<double>& tp) { return probe(tp, gather_frames(tp, leaf(tp, x), idx), ps); };
  });
  f.emplace_back("concat_channels", [](Case& c, Rng& rng) {
    const int t = pick(rng, 1, 6);
    auto& a = c.param("a", {pick(rng, 1, 3), t}, rng);
    auto& b = c.param("b", {pick(rng, 1, 3), t}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&a, &b, ps](Tape<double>& tp) { return probe(tp, concat_channels(tp, leaf(tp, a), leaf(tp, b)), ps); };
  });
  f.emplace_back("add", [](Case& c, Rng& rng) {
    const int ch = pick(rng, 1, 3), t = pick(rng, 1, 6);
    auto& a = c.param("a", {ch, t}, rng);
    auto& b = c.param("b", {ch, t}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&a, &b, ps](Tape<double>& tp) { return probe(tp, add(tp, leaf(tp, a), leaf(tp, b)), ps); };
  });
  f.emplace_back("leaky_relu", [](Case& c, Rng& rng) {
    auto& x = c.param("x", {pick(rng, 1, 3), pick(rng, 1, 6)}, rng);
    const double slope = std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, slope, ps](Tape<double>& tp) { return probe(tp, leaky_relu(tp, leaf(tp, x), slope), ps); };
  });
  f.emplace_back("tanh", [](Case& c, Rng& rng) {
    auto& x = c.param("x", {pick(rng, 1, 3), pick(rng, 1, 6)}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, ps](Tape<double>& tp) { return probe(tp, tanh_act(tp, leaf(tp, x)), ps); };
  });
  f.emplace_back("sigmoid", [](Case& c, Rng& rng) {
    auto& x = c.param("x", {pick(rng, 1, 3), pick(rng, 1, 6)}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, ps](Tape<double>& tp) { return probe(tp, sigmoid_act(tp, leaf(tp, x)), ps); };
  });
  f.emplace_back("gated_activation", [](Case& c, Rng& rng) {
    const int ch = pick(rng, 1, 3), t = pick(rng, 1, 6);
    auto& a = c.param("a", {ch, t}, rng);
    auto& b = c.param("b", {ch, t}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&a, &b, ps](Tape<double>& tp) { return probe(tp, gated_activation(tp, leaf(tp, a), leaf(tp, b)), ps); };
  });
  f.emplace_back("dropout", [](Case& c, Rng& rng) {
    auto& x = c.param("x", {pick(rng, 1, 3), pick(rng, 2, 8)}, rng);
    const double p = std::uniform_real_distribution<double>(0.05, 0.7)(rng);
    const std::uint64_t ms = rng(), ps = rng();
    c.loss = [&x, p, ms, ps](Tape<double>& tp) {
      Rng mask(ms);  // same mask on every evaluation
      return probe(tp, dropout(tp, leaf(tp, x), p, true, mask), ps);
    };
  });
  f.emplace_back("embedding_lookup", [](Case& c, Rng& rng) {
    const int v = pick(rng, 2, 6), e = pick(rng, 1, 4);
    auto& table = c.param("table", {v, e}, rng);
    std::vector<int> idx(pick(rng, 1, 8));
    for (auto& i : idx) i = pick(rng, 0, v - 1);
    const std::uint64_t ps = rng();
    c.loss = [&table, idx, ps](Tape<double>& tp) {
      return probe(tp, embedding_lookup(tp, table, std::span<const int>(idx)), ps);
    };
  });
  f.emplace_back("tied_projection", [](Case& c, Rng& rng) {
    const int v = pick(rng, 2, 6), e = pick(rng, 1, 4);
    auto& table = c.param("table", {v, e}, rng);
    auto& x = c.param("features", {e, pick(rng, 1, 6)}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&table, &x, ps](Tape<double>& tp) { return probe(tp, tied_projection(tp, leaf(tp, x), table), ps); };
  });
  f.emplace_back("softmax_cross_entropy", [](Case& c, Rng& rng) {
    const int v = pick(rng, 2, 6), t = pick(rng, 1, 6);
    auto& x = c.param("logits", {v, t}, rng, 2.0);
    std::vector<int> targets(t);
    for (auto& y : targets) y = pick(rng, 0, v - 1);
    c.loss = [&x, targets](Tape<double>& tp) {
      return softmax_cross_entropy(tp, leaf(tp, x), std::span<const int>(targets));
    };
  });
  f.emplace_back("binary_cross_entropy_sum", [](Case& c, Rng& rng) {
    const int p = pick(rng, 1, 5), t = pick(rng, 1, 6);
    auto& x = c.param("logits", {p, t}, rng, 2.0);
    Tensor<double> targets(p, t);
    for (auto& y : targets.data()) y = pick(rng, 0, 1);
    c.loss = [&x, targets](Tape<double>& tp) { return binary_cross_entropy_sum(tp, leaf(tp, x), targets); };
  });
  f.emplace_back("weighted_sum", [](Case& c, Rng& rng) {
    auto& x = c.param("x", {pick(rng, 1, 3), pick(rng, 1, 6)}, rng);
    const std::uint64_t ps = rng();
    c.loss = [&x, ps](Tape<double>& tp) { return probe(tp, leaf(tp, x), ps); };
  });
  return f;
}

ModelConfig random_network(Variant variant, Rng& rng) {
  ModelConfig c;
  c.variant = variant;
  c.stride = pick(rng, 2, 3);
  c.filter_width = pick(rng, 1, 3);
  c.hidden = pick(rng, 2, 3);
  c.residual_features = pick(rng, 2, 3);
  c.leaky_slope = 0.1;
  c.in_channels = pick(rng, 1, 2);
  c.out_channels = pick(rng, 1, 2);
  switch (variant) {
    case Variant::plain: c.levels = pick(rng, 1, 2); break;
    case Variant::residual:
      c.levels = 1;
      c.depth = pick(rng, 1, 2);  // covers crop, decimate, repeat and merge identities
      break;
    case Variant::dilated_baseline:
      c.levels = pick(rng, 1, 2);
      c.channels = {pick(rng, 1, 3), pick(rng, 1, 3)};
      c.channels.resize(c.levels);
      break;
  }
  if (pick(rng, 0, 2) == 0) {
    c.io_mode = IoMode::embedding_tied;
    c.vocab_size = pick(rng, 2, 5);
    c.embedding_dim = pick(rng, 2, 3);
  }
  return c;
}

void network_case(Case& cs, Model<double>& model, Rng& rng) {
  const ModelGraph& g = model.graph();
  const long T = g.min_length + pick(rng, 0, static_cast<int>(g.phase_period()) + 1);
  const ModelConfig& c = g.config;
  Model<double>* m = &model;
  if (c.io_mode == IoMode::embedding_tied) {
    std::vector<int> symbols(T);
    for (auto& s : symbols) s = pick(rng, 0, c.vocab_size - 1);
    const long n_out = g.schedule(T)[g.output].length;
    std::vector<int> targets(n_out);
    for (auto& s : targets) s = pick(rng, 0, c.vocab_size - 1);
    cs.loss = [m, symbols, targets](Tape<double>& tp) {
      Rng unused(0);
      auto fwd = forward(*m, tp, std::span<const int>(symbols), false, unused);
      return softmax_cross_entropy(tp, fwd.logits, std::span<const int>(targets));
    };
  } else {
    Tensor<double> frames = random_tensor(c.in_channels, static_cast<int>(T), rng);
    const std::uint64_t ps = rng();
    cs.loss = [m, frames, ps](Tape<double>& tp) {
      Rng unused(0);
      auto fwd = forward(*m, tp, frames, false, unused);
      return probe(tp, fwd.logits, ps);
    };
  }
}

void accumulate(SuiteEntry& e, const GradCheckResult& r) {
  ++e.instances;
  e.skipped_elements += r.skipped_elements;
  if (r.max_rel_error >= e.max_rel_error) {
    e.max_rel_error = r.max_rel_error;
    e.worst = r.worst;
  }
}

}  // namespace

std::vector<SuiteEntry> run_gradcheck_suite(int instances, std::uint64_t seed, double tolerance) {
  if (instances < 1) throw ConfigError("grad-check suite needs at least one instance");
  std::vector<SuiteEntry> out;
  Rng rng(seed);
  for (const auto& [name, factory] : op_cases()) {
    SuiteEntry e;
    e.name = name;
    for (int i = 0; i < instances; ++i) {
      Case c;
      factory(c, rng);
      accumulate(e, grad_check(c.pointers(), c.loss));
    }
    e.passed = e.max_rel_error < tolerance;
    out.push_back(e);
  }
  const std::pair<const char*, Variant> nets[] = {
      {"network:plain", Variant::plain},
      {"network:residual", Variant::residual},
      {"network:dilated_baseline", Variant::dilated_baseline},
  };
  for (const auto& [name, variant] : nets) {
    SuiteEntry e;
    e.name = name;
    for (int i = 0; i < instances; ++i) {
      const ModelConfig cfg = random_network(variant, rng);
      Model<double> model = build_model(cfg, rng()).cast<double>();
      // Nonzero biases so no path is trivially silent.
      for (auto* p : model.params().pointers())
        if (p->name.ends_with(".bias")) fill_normal(p->value, rng, 0.5);
      Case c;
      network_case(c, model, rng);
      accumulate(e, grad_check(model.params().pointers(), c.loss));
    }
    e.passed = e.max_rel_error < tolerance;
    out.push_back(e);
  }
  return out;
}

}  // namespace sequnet
