#include "sequnet/model.hpp"

#include <cmath>

namespace sequnet {
namespace {

bool is_normed_kernel(const ModelConfig& c, const ParamSpec& s) {
  return c.weight_norm && s.init == Init::kaiming_uniform && s.shape.size() == 3;
}

std::string gain_name(const std::string& kernel_name) {
  return kernel_name.substr(0, kernel_name.size() - std::string("kernel").size()) + "gain";
}

}  // namespace

template <typename T>
Model<T>::Model(ModelGraph graph, ParameterStore<T> store) : graph_(std::move(graph)), store_(std::move(store)) {
  bind();
  refresh();
}

template <typename T>
Model<T>::Model(const Model& other) : graph_(other.graph_), store_(other.store_) {
  bind();
  refresh();
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
  if (this != &other) {
    graph_ = other.graph_;
    store_ = other.store_;
    bind();
    refresh();
  }
  return *this;
}

template <typename T>
void Model<T>::bind() {
  const std::size_t n = graph_.params.size();
  by_spec_.assign(n, nullptr);
  gain_.assign(n, nullptr);
  derived_.clear();
  derived_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ParamSpec& s = graph_.params[i];
    Parameter<T>* p = store_.find(s.name);
    if (!p) throw ConfigError("parameter missing from store: " + s.name);
    if (p->shape != s.shape) throw ShapeError("parameter " + s.name + " has the wrong shape");
    by_spec_[i] = p;
    if (is_normed_kernel(graph_.config, s)) {
      Parameter<T>* g = store_.find(gain_name(s.name));
      if (!g || g->size() != static_cast<std::size_t>(s.shape[0]))
        throw ConfigError("weight-normalised kernel without a gain: " + s.name);
      gain_[i] = g;
      derived_[i] = std::make_unique<Parameter<T>>(s.name, s.shape);
    }
  }
}

template <typename T>
Parameter<T>& Model<T>::effective(int spec) {
  return derived_[spec] ? *derived_[spec] : *by_spec_[spec];
}

template <typename T>
void Model<T>::refresh() {
  for (std::size_t i = 0; i < derived_.size(); ++i) {
    if (!derived_[i]) continue;
    const Parameter<T>& v = *by_spec_[i];
    const Parameter<T>& g = *gain_[i];
    Parameter<T>& w = *derived_[i];
    const std::size_t per = v.size() / g.size();
    for (std::size_t c = 0; c < g.size(); ++c) {
      T norm2 = T(0);
      for (std::size_t j = 0; j < per; ++j) norm2 += v.value[c * per + j] * v.value[c * per + j];
      const T scale = norm2 > T(0) ? g.value[c] / std::sqrt(norm2) : T(0);
      for (std::size_t j = 0; j < per; ++j) w.value[c * per + j] = scale * v.value[c * per + j];
    }
    w.zero_grad();
  }
}

template <typename T>
void Model<T>::pull_gradients() {
  for (std::size_t i = 0; i < derived_.size(); ++i) {
    if (!derived_[i]) continue;
    Parameter<T>& v = *by_spec_[i];
    Parameter<T>& g = *gain_[i];
    Parameter<T>& w = *derived_[i];
    const std::size_t per = v.size() / g.size();
    for (std::size_t c = 0; c < g.size(); ++c) {
      T norm2 = T(0);
      for (std::size_t j = 0; j < per; ++j) norm2 += v.value[c * per + j] * v.value[c * per + j];
      if (norm2 <= T(0)) continue;
      const T norm = std::sqrt(norm2);
      T dot = T(0);
      for (std::size_t j = 0; j < per; ++j) dot += w.grad[c * per + j] * v.value[c * per + j];
      dot /= norm;
      g.grad[c] += dot;
      const T s = g.value[c] / norm;
      for (std::size_t j = 0; j < per; ++j)
        v.grad[c * per + j] += s * (w.grad[c * per + j] - dot * v.value[c * per + j] / norm);
    }
    w.zero_grad();
  }
}

Model<float> build_model(const ModelConfig& config, std::uint64_t seed) {
  ModelGraph graph = build_graph(config);
  ParameterStore<double> store;
  std::mt19937_64 rng(seed);
  const double slope = config.leaky_slope;
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  for (const ParamSpec& s : graph.params) {
    Parameter<double>& p = store.add(s.name, s.shape);
    double bound = 0.0;
    if (s.init == Init::kaiming_uniform) bound = gain * std::sqrt(3.0 / std::max(1, s.fan_in));
    if (s.init == Init::embedding) bound = std::sqrt(3.0 / std::max(1, s.fan_in));
    if (bound > 0.0) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (auto& v : p.value) v = u(rng);
    }
    if (is_normed_kernel(config, s)) {
      Parameter<double>& g = store.add(gain_name(s.name), {s.shape[0]});
      const std::size_t per = p.size() / g.size();
      for (std::size_t c = 0; c < g.size(); ++c) {
        double n2 = 0.0;
        for (std::size_t j = 0; j < per; ++j) n2 += p.value[c * per + j] * p.value[c * per + j];
        g.value[c] = std::sqrt(n2);
      }
    }
  }
  return Model<float>(std::move(graph), store.cast<float>());
}

namespace {

template <typename T>
ForwardResult<T> run(Model<T>& model, Tape<T>& tape, std::span<const int> symbols, const Tensor<T>* frames,
                     bool training, std::mt19937_64& rng) {
  const ModelGraph& g = model.graph();
  const ModelConfig& c = g.config;
  const long T_in = frames ? frames->time() : static_cast<long>(symbols.size());
  if (T_in < g.min_length) throw InsufficientLength(g.min_length, T_in, "model input");
  if (frames && frames->channels() != c.in_channels)
    throw ShapeError("model input has " + std::to_string(frames->channels()) + " channels, expected " +
                     std::to_string(c.in_channels));
  if (c.weight_norm) model.refresh();
  ForwardResult<T> r;
  r.grids = g.schedule(T_in);
  r.node_vars.assign(g.nodes.size(), Var{});
  const T slope = static_cast<T>(c.leaky_slope);
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const Node& n = g.nodes[id];
    const Var a = n.a >= 0 ? r.node_vars[n.a] : Var{};
    const Var b = n.b >= 0 ? r.node_vars[n.b] : Var{};
    const Grid& out = r.grids[id];
    const Grid* ga = n.a >= 0 ? &r.grids[n.a] : nullptr;
    Var v;
    switch (n.kind) {
      case OpKind::input:
        if (frames) v = tape.leaf(*frames);
        break;
      case OpKind::embed: v = embedding_lookup(tape, model.stored(n.kernel), symbols); break;
      case OpKind::conv:
        v = conv1d_valid(tape, a, model.effective(n.kernel), model.stored(n.bias), n.stride, n.dilation);
        break;
      case OpKind::upsample: {
        const Grid& ref = r.grids[n.ref];
        const long full = (ref.last() - ga->first) / ref.spacing + 1;
        v = conv1d_transposed(tape, a, model.effective(n.kernel), model.stored(n.bias), n.stride,
                              std::optional<int>(static_cast<int>(full)));
        v = crop_front(tape, v, n.width - 1);
        break;
      }
      case OpKind::leaky_relu: v = leaky_relu(tape, a, slope); break;
      case OpKind::dropout: v = dropout(tape, a, n.dropout, training, rng); break;
      case OpKind::gate: v = gated_activation(tape, a, b); break;
      case OpKind::add: v = add(tape, a, b); break;
      case OpKind::concat: v = concat_channels(tape, a, b); break;
      case OpKind::crop_to: {
        const long drop = (out.first - ga->first) / ga->spacing;
        v = crop_front(tape, a, static_cast<int>(drop));
        break;
      }
      case OpKind::decimate:
      case OpKind::repeat: {
        std::vector<int> idx(out.length);
        for (long j = 0; j < out.length; ++j) {
          const long d = out.position(j) - ga->first;
          idx[j] = static_cast<int>(d >= 0 ? d / ga->spacing : -1);
        }
        v = gather_frames(tape, a, std::move(idx));
        break;
      }
      case OpKind::tied_projection: v = tied_projection(tape, a, model.stored(n.kernel)); break;
    }
    if (v.valid() && tape.value(v).time() != out.length)
      throw AlignmentError(n.name + " produced " + std::to_string(tape.value(v).time()) + " frames, schedule says " +
                           std::to_string(out.length));
    r.node_vars[id] = v;
  }
  r.logits = r.node_vars[g.output];
  r.output_grid = r.grids[g.output];
  return r;
}

}  // namespace

template <typename T>
ForwardResult<T> forward(Model<T>& model, Tape<T>& tape, std::span<const int> symbols, bool training,
                         std::mt19937_64& rng) {
  if (model.config().io_mode != IoMode::embedding_tied)
    throw ConfigError("symbol input needs io_mode = embedding_tied");
  return run<T>(model, tape, symbols, nullptr, training, rng);
}

template <typename T>
ForwardResult<T> forward(Model<T>& model, Tape<T>& tape, const Tensor<T>& frames, bool training,
                         std::mt19937_64& rng) {
  if (model.config().io_mode == IoMode::embedding_tied) throw ConfigError("embedding io needs symbol input");
  return run<T>(model, tape, {}, &frames, training, rng);
}

template <typename T>
Tensor<T> predict(Model<T>& model, std::span<const int> symbols) {
  Tape<T> tape(false);
  std::mt19937_64 rng(0);
  auto r = forward(model, tape, symbols, false, rng);
  return tape.value(r.logits);
}

template <typename T>
Tensor<T> predict(Model<T>& model, const Tensor<T>& frames) {
  Tape<T> tape(false);
  std::mt19937_64 rng(0);
  auto r = forward(model, tape, frames, false, rng);
  return tape.value(r.logits);
}

long receptive_field_empirical(Model<double>& model, std::uint64_t seed) {
  const ModelGraph& g = model.graph();
  const ModelConfig& c = g.config;
  const long period = g.phase_period();
  const long T = 2 * (g.min_length + period);
  std::mt19937_64 rng(seed);
  const bool symbolic = c.io_mode == IoMode::embedding_tied;
  std::vector<int> symbols;
  Tensor<double> frames;
  if (symbolic) {
    std::uniform_int_distribution<int> pick(0, c.vocab_size - 1);
    symbols.resize(T);
    for (auto& s : symbols) s = pick(rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    frames = Tensor<double>(c.in_channels, static_cast<int>(T));
    for (auto& v : frames.data()) v = normal(rng);
  }
  // Frame-wise sensitivity is read off the first tensor on the input time axis.
  int source = g.input;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (g.nodes[i].kind == OpKind::embed) source = static_cast<int>(i);
  const Grid out = g.schedule(T)[g.output];
  const long watch = std::min(period, out.length);
  const long first_watched = out.length - watch;
  std::vector<long> earliest(watch, -1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (long j = 0; j < watch; ++j) {
    Tape<double> tape(true);
    std::mt19937_64 unused(0);
    auto fwd = symbolic ? forward(model, tape, std::span<const int>(symbols), false, unused)
                        : forward(model, tape, frames, false, unused);
    const auto& logits = tape.value(fwd.logits);
    Tensor<double> probe(logits.channels(), logits.time());
    for (int ch = 0; ch < probe.channels(); ++ch) probe.at(ch, static_cast<int>(first_watched + j)) = 1.0 + normal(rng) * 0.1;
    tape.backward(weighted_sum(tape, fwd.logits, probe));
    const Var src = fwd.node_vars[source];
    if (!tape.has_grad(src)) continue;
    const auto& sens = tape.grad(src);
    for (int t = 0; t < sens.time() && earliest[j] < 0; ++t)
      for (int ch = 0; ch < sens.channels(); ++ch)
        if (sens.at(ch, t) != 0.0) {
          earliest[j] = t;
          break;
        }
  }
  model.params().zero_grads();
  long rf = 0;
  for (long j = 0; j < watch; ++j)
    if (earliest[j] >= 0) rf = std::max(rf, out.position(first_watched + j) - earliest[j] + 1);
  return rf;
}

template class Model<float>;
template class Model<double>;

#define SEQUNET_INSTANTIATE_FORWARD(T)                                                                     \
  template ForwardResult<T> forward<T>(Model<T>&, Tape<T>&, std::span<const int>, bool, std::mt19937_64&); \
  template ForwardResult<T> forward<T>(Model<T>&, Tape<T>&, const Tensor<T>&, bool, std::mt19937_64&);     \
  template Tensor<T> predict<T>(Model<T>&, std::span<const int>);                                          \
  template Tensor<T> predict<T>(Model<T>&, const Tensor<T>&);

SEQUNET_INSTANTIATE_FORWARD(float)
SEQUNET_INSTANTIATE_FORWARD(double)

}  // namespace sequnet
