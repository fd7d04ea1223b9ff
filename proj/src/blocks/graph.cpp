#include "sequnet/graph.hpp"

#include <algorithm>
#include <limits>

#include "sequnet/errors.hpp"

namespace sequnet {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::input: return "input";
    case OpKind::embed: return "embed";
    case OpKind::conv: return "conv";
    case OpKind::upsample: return "upsample";
    case OpKind::leaky_relu: return "leaky_relu";
    case OpKind::dropout: return "dropout";
    case OpKind::gate: return "gate";
    case OpKind::add: return "add";
    case OpKind::concat: return "concat";
    case OpKind::crop_to: return "crop_to";
    case OpKind::decimate: return "decimate";
    case OpKind::repeat: return "repeat";
    case OpKind::tied_projection: return "tied_projection";
  }
  return "?";
}

namespace {

class Builder {
 public:
  explicit Builder(const ModelConfig& c) : c_(c) { g_.config = c; }

  int param(const std::string& name, std::vector<int> shape, int fan_in, Init init, int block) {
    g_.params.push_back({name, std::move(shape), fan_in, init, block});
    return static_cast<int>(g_.params.size()) - 1;
  }

  int input() {
    Node n;
    n.kind = OpKind::input;
    n.channels = c_.io_mode == IoMode::embedding_tied ? 0 : c_.in_channels;
    n.name = "input";
    g_.input = push_rated(n);
    int x = g_.input;
    if (c_.io_mode == IoMode::embedding_tied) {
      g_.embedding = param("block0.embedding.table", {c_.vocab_size, c_.embedding_dim}, c_.embedding_dim,
                           Init::embedding, 0);
      Node e;
      e.kind = OpKind::embed;
      e.a = x;
      e.kernel = g_.embedding;
      e.channels = c_.embedding_dim;
      e.name = "block0.embedding";
      x = push_rated(e);
    }
    if (c_.input_dropout > 0.0) x = dropout(x, c_.input_dropout, "block0.input_dropout");
    return x;
  }

  int conv(int x, int cout, int width, int stride, int dilation, const std::string& role, int block, int level,
           bool counted) {
    const int cin = g_.nodes[x].channels;
    const std::string prefix = "block" + std::to_string(block) + "." + role;
    Node n;
    n.kind = OpKind::conv;
    n.a = x;
    n.kernel = param(prefix + ".kernel", {cout, cin, width}, cin * width, Init::kaiming_uniform, block);
    n.bias = param(prefix + ".bias", {cout}, cin * width, Init::zeros, block);
    n.width = width;
    n.stride = stride;
    n.dilation = dilation;
    n.channels = cout;
    n.rate = g_.nodes[x].rate + (stride > 1 ? 1 : 0);
    n.level = level;
    n.block = block;
    n.counted = counted;
    n.name = prefix;
    return push_rated(n);
  }

  int upsample(int coarse, int ref, int cout, const std::string& role, int block, int level, bool counted) {
    const int cin = g_.nodes[coarse].channels;
    const int width = c_.filter_width;
    const std::string prefix = "block" + std::to_string(block) + "." + role;
    Node n;
    n.kind = OpKind::upsample;
    n.a = coarse;
    n.ref = ref;
    n.kernel = param(prefix + ".kernel", {cout, cin, width}, cin * ceil_div(width, c_.stride), Init::kaiming_uniform,
                     block);
    n.bias = param(prefix + ".bias", {cout}, cin * width, Init::zeros, block);
    n.width = width;
    n.stride = c_.stride;
    n.channels = cout;
    n.rate = g_.nodes[ref].rate;
    n.level = level;
    n.block = block;
    n.counted = counted;
    n.name = prefix;
    return push_rated(n);
  }

  int unary(OpKind kind, int x, const std::string& name) {
    Node n;
    n.kind = kind;
    n.a = x;
    n.channels = g_.nodes[x].channels;
    n.rate = g_.nodes[x].rate;
    n.level = g_.nodes[x].level;
    n.block = g_.nodes[x].block;
    n.name = name;
    return push_rated(n);
  }

  int act(int x) { return unary(OpKind::leaky_relu, x, g_.nodes[x].name + ".act"); }

  int dropout(int x, double p, const std::string& name) {
    if (p <= 0.0) return x;
    int d = unary(OpKind::dropout, x, name);
    g_.nodes[d].dropout = p;
    return d;
  }

  int act_drop(int x) { return dropout(act(x), c_.dropout, g_.nodes[x].name + ".dropout"); }

  int binary(OpKind kind, int a, int b, const std::string& name, int channels) {
    Node n;
    n.kind = kind;
    n.a = a;
    n.b = b;
    n.channels = channels;
    n.rate = g_.nodes[a].rate;
    n.level = g_.nodes[a].level;
    n.block = g_.nodes[a].block;
    n.name = name;
    return push_rated(n);
  }

  int with_ref(OpKind kind, int a, int ref, const std::string& name) {
    Node n;
    n.kind = kind;
    n.a = a;
    n.ref = ref;
    n.channels = g_.nodes[a].channels;
    n.rate = g_.nodes[ref].rate;
    n.level = g_.nodes[ref].level;
    n.block = g_.nodes[ref].block;
    n.name = name;
    return push_rated(n);
  }

  int head(int x, int block) {
    const bool tied = c_.io_mode == IoMode::embedding_tied;
    const int cout = tied ? c_.embedding_dim : c_.out_channels;
    int y = conv(x, cout, 1, 1, 1, "out", block, 0, false);
    if (tied) {
      Node n;
      n.kind = OpKind::tied_projection;
      n.a = y;
      n.kernel = g_.embedding;
      n.channels = c_.vocab_size;
      n.rate = g_.nodes[y].rate;
      n.block = block;
      n.name = "block" + std::to_string(block) + ".projection";
      y = push_rated(n);
    }
    g_.num_blocks = block + 1;
    return y;
  }

  void shortcut(int tap, int consumer) { g_.shortcuts.emplace_back(tap, consumer); }

  // The baseline overrides the clock with its dilation level.
  void set_fixed_clock(int level) { fixed_clock_ = level; }

  ModelGraph& graph() { return g_; }

 private:
  static int ceil_div(int a, int b) { return (a + b - 1) / b; }

  int push_rated(Node n) {
    n.clock_level = fixed_clock_ >= 0 ? fixed_clock_ : n.rate + 1;
    g_.nodes.push_back(std::move(n));
    return static_cast<int>(g_.nodes.size()) - 1;
  }

  const ModelConfig& c_;
  ModelGraph g_;
  int fixed_clock_ = -1;
};

void build_plain(Builder& bld, const ModelConfig& c) {
  const int L = c.levels;
  const int W = c.filter_width;
  const auto ch = c.resolved_channels();
  int x = bld.input();
  std::vector<int> taps(L + 1, -1);
  for (int i = 1; i <= L; ++i) {
    int h = bld.act_drop(bld.conv(x, ch[i - 1], W, 1, 1, "conv", i, i, true));
    taps[i] = h;
    x = bld.act_drop(bld.conv(h, ch[i], W, c.stride, 1, "down", i, i, true));
  }
  x = bld.act_drop(bld.conv(x, ch[L], W, 1, 1, "conv", L + 1, L + 1, true));
  for (int i = L; i >= 1; --i) {
    const int block = 2 * L + 2 - i;
    const std::string p = "block" + std::to_string(block);
    int u = bld.act_drop(bld.upsample(x, taps[i], ch[i], "up", block, i, true));
    int s = bld.with_ref(OpKind::crop_to, taps[i], u, p + ".shortcut_crop");
    bld.shortcut(taps[i], s);
    int cat = bld.binary(OpKind::concat, s, u, p + ".concat", ch[i - 1] + ch[i]);
    x = bld.act_drop(bld.conv(cat, ch[i - 1], W, 1, 1, "merge", block, i, true));
  }
  bld.graph().output = bld.head(x, 2 * L + 2);
}

// y = identity + tanh(C1(src)) * sigmoid(C2(src)) with the layer-specific identity.
int residual_layer(Builder& bld, const ModelConfig& c, int x, int block, int level, const std::string& role,
                   char kind, int ref = -1) {
  const int F = c.residual_features;
  const int W = c.filter_width;
  const std::string p = "block" + std::to_string(block) + "." + role;
  int c1 = -1, c2 = -1, src = x;
  if (kind == 'p' || kind == 'm') {
    if (kind == 'm') {
      // x is the upsampled stream, ref the shortcut.
      int s = bld.with_ref(OpKind::crop_to, ref, x, p + ".shortcut_crop");
      bld.shortcut(ref, s);
      src = bld.binary(OpKind::concat, s, x, p + ".concat", 2 * F);
      x = s;
    }
    c1 = bld.conv(src, F, W, 1, 1, role + ".c1", block, level, false);
    c2 = bld.conv(src, F, W, 1, 1, role + ".c2", block, level, false);
  } else if (kind == 'd') {
    c1 = bld.conv(x, F, W, c.stride, 1, role + ".c1", block, level, false);
    c2 = bld.conv(x, F, W, c.stride, 1, role + ".c2", block, level, false);
  } else {
    c1 = bld.upsample(x, ref, F, role + ".c1", block, level, false);
    c2 = bld.upsample(x, ref, F, role + ".c2", block, level, false);
  }
  int g = bld.binary(OpKind::gate, c1, c2, p + ".gate", F);
  g = bld.dropout(g, c.dropout, p + ".dropout");
  int id = -1;
  if (kind == 'p' || kind == 'm') id = bld.with_ref(OpKind::crop_to, x, g, p + ".identity");
  else if (kind == 'd') id = bld.with_ref(OpKind::decimate, x, g, p + ".identity");
  else id = bld.with_ref(OpKind::repeat, x, g, p + ".identity");
  int y = bld.binary(OpKind::add, id, g, p + ".out", F);
  auto& node = bld.graph().nodes[y];
  node.counted = true;
  node.level = level;
  return y;
}

void build_residual(Builder& bld, const ModelConfig& c) {
  const int L = c.levels;
  const int D = c.depth;
  const int F = c.residual_features;
  int x = bld.input();
  x = bld.conv(x, F, c.filter_width, 1, 1, "input", 0, 0, false);
  std::vector<int> taps(L + 1, -1);
  for (int i = 1; i <= L; ++i) {
    for (int j = 0; j < D; ++j) x = residual_layer(bld, c, x, i, i, "layer" + std::to_string(j), 'p');
    taps[i] = x;
    x = residual_layer(bld, c, x, i, i, "layer" + std::to_string(D), 'd');
  }
  for (int j = 0; j < std::max(D, 1); ++j)
    x = residual_layer(bld, c, x, L + 1, L + 1, "layer" + std::to_string(j), 'p');
  for (int i = L; i >= 1; --i) {
    const int block = 2 * L + 2 - i;
    x = residual_layer(bld, c, x, block, i, "layer0", 'u', taps[i]);
    x = residual_layer(bld, c, x, block, i, "layer1", 'm', taps[i]);
    for (int j = 2; j <= D; ++j) x = residual_layer(bld, c, x, block, i, "layer" + std::to_string(j), 'p');
  }
  x = bld.act(x);
  bld.graph().output = bld.head(x, 2 * L + 2);
}

void build_baseline(Builder& bld, const ModelConfig& c) {
  const auto ch = c.resolved_channels();
  const int W = c.filter_width;
  int x = bld.input();
  int block = 1;
  for (int s = 0; s < c.stacks; ++s) {
    long dilation = 1;
    for (int i = 1; i <= c.levels; ++i, ++block) {
      bld.set_fixed_clock(i);
      const int cin = bld.graph().nodes[x].channels;
      const int cout = ch[i - 1];
      if (dilation > std::numeric_limits<int>::max() / 2) throw ConfigError("dilation overflow");
      const int d = static_cast<int>(dilation);
      int h = bld.act_drop(bld.conv(x, cout, W, 1, d, "conv1", block, i, false));
      h = bld.act_drop(bld.conv(h, cout, W, 1, d, "conv2", block, i, false));
      int id = cin != cout ? bld.conv(x, cout, 1, 1, 1, "skip", block, i, false) : x;
      const std::string p = "block" + std::to_string(block);
      id = bld.with_ref(OpKind::crop_to, id, h, p + ".identity");
      int y = bld.binary(OpKind::add, id, h, p + ".sum", cout);
      y = bld.act(y);
      auto& node = bld.graph().nodes[y];
      node.counted = true;
      node.level = i;
      x = y;
      dilation *= c.stride;
    }
  }
  bld.set_fixed_clock(0);
  bld.graph().output = bld.head(x, block);
}

long floor_div(long a, long b) {
  long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

ModelGraph build_graph(const ModelConfig& config) {
  config.validate();
  Builder bld(config);
  switch (config.variant) {
    case Variant::plain: build_plain(bld, config); break;
    case Variant::residual: build_residual(bld, config); break;
    case Variant::dilated_baseline: build_baseline(bld, config); break;
  }
  ModelGraph g = std::move(bld.graph());
  // io blocks run every step and are not attributed to a level.
  for (auto& n : g.nodes)
    if (n.block == 0 || n.block == g.num_blocks - 1) n.clock_level = 0;

  long best = 1;
  while (!g.feasible(best)) {
    if (best > (1L << 32)) throw ConfigError("no feasible input length");
    ++best;
  }
  g.min_length = best;
  return g;
}

std::vector<Grid> ModelGraph::schedule(long T) const {
  std::vector<Grid> grid(nodes.size());
  const long k = config.stride;
  auto bad = [](Grid& gr) { gr.length = 0; };
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    Grid& out = grid[id];
    const Grid* a = n.a >= 0 ? &grid[n.a] : nullptr;
    const Grid* r = n.ref >= 0 ? &grid[n.ref] : nullptr;
    if (a && a->length < 1 && n.kind != OpKind::input) {
      out = *a;
      bad(out);
      continue;
    }
    if (r && r->length < 1) {
      bad(out);
      continue;
    }
    switch (n.kind) {
      case OpKind::input: out = {0, 1, T}; break;
      case OpKind::embed:
      case OpKind::leaky_relu:
      case OpKind::dropout:
      case OpKind::tied_projection: out = *a; break;
      case OpKind::conv: {
        if (n.stride == 1) {
          const long span = static_cast<long>(n.width - 1) * n.dilation;
          out = {a->first + span * a->spacing, a->spacing, a->length - span};
        } else {
          out = {a->first + static_cast<long>(n.width - 1) * a->spacing, a->spacing * n.stride,
                 a->length >= n.width ? (a->length - n.width) / n.stride + 1 : 0};
        }
        break;
      }
      case OpKind::upsample: {
        const long s = r->spacing;
        const long b = a->first;
        if (a->spacing != s * k || r->last() < b) {
          bad(out);
          break;
        }
        out = {b + (n.width - 1) * s, s, (r->last() - b) / s - n.width + 2};
        if (out.first < r->first) bad(out);
        break;
      }
      case OpKind::crop_to: {
        if (a->spacing != r->spacing || r->first < a->first || (r->first - a->first) % a->spacing != 0) {
          bad(out);
          break;
        }
        out = {r->first, a->spacing, (a->last() - r->first) / a->spacing + 1};
        break;
      }
      case OpKind::decimate: {
        if (r->first < a->first || r->spacing % a->spacing != 0 || (r->first - a->first) % a->spacing != 0 ||
            r->last() > a->last()) {
          bad(out);
          break;
        }
        out = *r;
        break;
      }
      case OpKind::repeat: {
        if (r->first < a->first) {
          bad(out);
          break;
        }
        out = *r;
        break;
      }
      case OpKind::gate:
      case OpKind::add:
      case OpKind::concat: {
        const Grid& b = grid[n.b];
        if (b.length < 1) {
          bad(out);
          break;
        }
        if (!(*a == b)) throw AlignmentError("schedule: operands of " + n.name + " sit on different grids");
        out = *a;
        break;
      }
    }
    if (out.length < 0) out.length = 0;
  }
  return grid;
}

bool ModelGraph::feasible(long T) const {
  if (T < 1) return false;
  const auto g = schedule(T);
  return std::all_of(g.begin(), g.end(), [](const Grid& x) { return x.length >= 1; });
}

long ModelGraph::count_parameters() const {
  long total = 0;
  for (const auto& p : params) {
    long n = 1;
    for (int d : p.shape) n *= d;
    total += n;
  }
  return total;
}

std::vector<long> ModelGraph::earliest_dependency(long T) const {
  if (!feasible(T)) throw InsufficientLength(min_length, T, "dependency analysis");
  const auto grid = schedule(T);
  constexpr long none = std::numeric_limits<long>::max();
  std::vector<std::vector<long>> lo(nodes.size());
  auto merge = [](long x, long y) { return std::min(x, y); };
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const Node& n = nodes[id];
    const Grid& g = grid[id];
    auto& out = lo[id];
    out.assign(g.length, none);
    const std::vector<long>* in = n.a >= 0 ? &lo[n.a] : nullptr;
    const Grid* ga = n.a >= 0 ? &grid[n.a] : nullptr;
    switch (n.kind) {
      case OpKind::input:
        for (long t = 0; t < g.length; ++t) out[t] = t;
        break;
      case OpKind::embed:
      case OpKind::leaky_relu:
      case OpKind::dropout:
      case OpKind::tied_projection: out = *in; break;
      case OpKind::conv:
        for (long t = 0; t < g.length; ++t)
          for (int w = 0; w < n.width; ++w)
            out[t] = merge(out[t], (*in)[t * n.stride + static_cast<long>(w) * n.dilation]);
        break;
      case OpKind::upsample: {
        const long s = g.spacing;
        const long b = ga->first;
        for (long t = 0; t < g.length; ++t) {
          const long u = (g.position(t) - b) / s;
          for (int w = 0; w < n.width; ++w) {
            const long num = u - w;
            if (num < 0 || num % n.stride != 0) continue;
            const long j = num / n.stride;
            if (j < ga->length) out[t] = merge(out[t], (*in)[j]);
          }
        }
        break;
      }
      case OpKind::crop_to:
      case OpKind::decimate:
        for (long t = 0; t < g.length; ++t) out[t] = (*in)[(g.position(t) - ga->first) / ga->spacing];
        break;
      case OpKind::repeat:
        for (long t = 0; t < g.length; ++t) out[t] = (*in)[floor_div(g.position(t) - ga->first, ga->spacing)];
        break;
      case OpKind::gate:
      case OpKind::add:
      case OpKind::concat:
        for (long t = 0; t < g.length; ++t) out[t] = merge((*in)[t], lo[n.b][t]);
        break;
    }
  }
  std::vector<long> result = lo[output];
  for (auto& v : result)
    if (v == none) v = -1;
  return result;
}

long ModelGraph::phase_period() const {
  if (config.variant == Variant::dilated_baseline) return 1;
  long p = 1;
  for (int i = 0; i < config.levels; ++i) p *= config.stride;
  return p;
}

int ModelGraph::max_clock_level() const {
  int m = 0;
  for (const auto& n : nodes) m = std::max(m, n.clock_level);
  return m;
}

long ModelGraph::receptive_field() const {
  const long period = phase_period();
  long T = 2 * (min_length + period);
  for (;;) {
    const auto dep = earliest_dependency(T);
    const auto grid = schedule(T);
    const Grid& g = grid[output];
    const long frames = std::min<long>(period, g.length);
    long rf = 0;
    bool truncated = false;
    for (long t = g.length - frames; t < g.length; ++t) {
      if (dep[t] < 0) continue;
      if (dep[t] == 0) truncated = true;
      rf = std::max(rf, g.position(t) - dep[t] + 1);
    }
    if (!truncated) return rf;
    T *= 2;
  }
}

long receptive_field_analytic(const ModelConfig& config) { return build_graph(config).receptive_field(); }

long min_input_length(const ModelConfig& config) { return build_graph(config).min_length; }

}  // namespace sequnet
