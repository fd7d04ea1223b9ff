#include "sequnet/stream.hpp"

#include <cmath>

namespace sequnet {
namespace {

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// Frames each consumer reads from node `id`, newest first.
int lookback(const ModelGraph& g, int id) {
  int need = 1;
  for (const Node& n : g.nodes) {
    if (n.a != id) continue;
    if (n.kind == OpKind::conv) need = std::max(need, (n.width - 1) * n.dilation + 1);
    if (n.kind == OpKind::upsample) need = std::max(need, (n.width - 1) / n.stride + 2);
  }
  return need;
}

}  // namespace

template <typename T>
Stream<T>::Stream(Model<T>& model, std::span<const int> context, bool training) : model_(&model) {
  if (training) throw ConfigError("streaming runs in eval mode only; training-mode streams are rejected");
  Tape<T> tape(false);
  std::mt19937_64 rng(0);
  auto fwd = forward(model, tape, context, false, rng);
  init(fwd, tape, static_cast<long>(context.size()));
}

template <typename T>
Stream<T>::Stream(Model<T>& model, const Tensor<T>& context, bool training) : model_(&model) {
  if (training) throw ConfigError("streaming runs in eval mode only; training-mode streams are rejected");
  Tape<T> tape(false);
  std::mt19937_64 rng(0);
  auto fwd = forward(model, tape, context, false, rng);
  init(fwd, tape, context.time());
}

template <typename T>
void Stream<T>::init(const ForwardResult<T>& fwd, const Tape<T>& tape, long context_length) {
  const ModelGraph& g = model_->graph();
  const std::size_t n = g.nodes.size();
  rings_.assign(n, Ring{});
  kernels_.assign(n, {});
  std::size_t widest = 1;
  for (std::size_t id = 0; id < n; ++id) {
    const Node& node = g.nodes[id];
    const Grid& grid = fwd.grids[id];
    Ring& r = rings_[id];
    r.channels = node.kind == OpKind::input && node.channels == 0 ? 0 : node.channels;
    r.capacity = lookback(g, static_cast<int>(id));
    r.count = grid.length;
    r.first = grid.first;
    r.spacing = grid.spacing;
    r.data.assign(static_cast<std::size_t>(r.capacity) * r.channels, T(0));
    widest = std::max<std::size_t>(widest, r.channels);
    if (fwd.node_vars[id].valid() && r.channels > 0) {
      const Tensor<T>& v = tape.value(fwd.node_vars[id]);
      const long keep = std::min<long>(r.capacity, grid.length);
      for (long j = grid.length - keep; j < grid.length; ++j) {
        T* dst = r.data.data() + static_cast<std::size_t>(j % r.capacity) * r.channels;
        for (int c = 0; c < r.channels; ++c) dst[c] = v.at(c, static_cast<int>(j));
      }
    }
    if (node.kind == OpKind::conv || node.kind == OpKind::upsample) {
      const Parameter<T>& K = model_->effective(node.kernel);
      const int co = K.shape[0], ci = K.shape[1], W = K.shape[2];
      auto& kt = kernels_[id];
      kt.resize(K.size());
      for (int c = 0; c < co; ++c)
        for (int i = 0; i < ci; ++i)
          for (int w = 0; w < W; ++w)
            kt[(static_cast<std::size_t>(i) * W + w) * co + c] = K.value[(static_cast<std::size_t>(c) * ci + i) * W + w];
    }
  }
  scratch_.assign(widest, T(0));
  const Tensor<T>& logits = tape.value(fwd.logits);
  first_logits_ = logits.frame(logits.time() - 1);
  logits_ = first_logits_;
  levels_ = g.config.levels;
  updates_.assign(levels_, 0);
  next_position_ = context_length;
}

template <typename T>
const std::vector<T>& Stream<T>::step(int symbol) {
  if (model_->config().io_mode != IoMode::embedding_tied) throw ConfigError("symbol step needs embedding io");
  const int V = model_->config().vocab_size;
  if (symbol < 0 || symbol >= V) throw IndexError("symbol " + std::to_string(symbol) + " outside vocabulary");
  advance(symbol, {});
  return logits_;
}

template <typename T>
const std::vector<T>& Stream<T>::step(std::span<const T> frame) {
  if (model_->config().io_mode == IoMode::embedding_tied) throw ConfigError("frame step needs linear or pitch io");
  if (static_cast<int>(frame.size()) != model_->config().in_channels)
    throw ShapeError("stream frame has " + std::to_string(frame.size()) + " channels");
  advance(-1, frame);
  return logits_;
}

template <typename T>
void Stream<T>::advance(int symbol, std::span<const T> frame) {
  const ModelGraph& g = model_->graph();
  const T slope = static_cast<T>(g.config.leaky_slope);
  const long p = next_position_;
  const int max_clock = g.max_clock_level();
  std::vector<char> fired(max_clock + 1, 0);
  for (std::size_t id = 0; id < g.nodes.size(); ++id) {
    const Node& n = g.nodes[id];
    Ring& r = rings_[id];
    if ((p - r.first) % r.spacing != 0) continue;
    ++node_evals_;
    fired[n.clock_level] = 1;
    const Ring* a = n.a >= 0 ? &rings_[n.a] : nullptr;
    const Ring* b = n.b >= 0 ? &rings_[n.b] : nullptr;
    const int C = r.channels;
    T* out = scratch_.data();
    switch (n.kind) {
      case OpKind::input:
        for (int c = 0; c < C; ++c) out[c] = frame[c];
        break;
      case OpKind::embed: {
        const Parameter<T>& table = model_->stored(n.kernel);
        for (int c = 0; c < C; ++c) out[c] = table.value[static_cast<std::size_t>(symbol) * C + c];
        break;
      }
      case OpKind::conv: {
        const Parameter<T>& bias = model_->stored(n.bias);
        const auto& kt = kernels_[id];
        const int ci = a->channels, W = n.width;
        for (int c = 0; c < C; ++c) out[c] = bias.value[c];
        for (int i = 0; i < ci; ++i)
          for (int w = 0; w < W; ++w) {
            const T xv = a->frame(static_cast<long>(W - 1 - w) * n.dilation)[i];
            const T* k = kt.data() + (static_cast<std::size_t>(i) * W + w) * C;
            for (int c = 0; c < C; ++c) out[c] += k[c] * xv;
          }
        break;
      }
      case OpKind::upsample: {
        const Parameter<T>& bias = model_->stored(n.bias);
        const auto& kt = kernels_[id];
        const int ci = a->channels, W = n.width, k = n.stride;
        const long u = (p - a->first) / r.spacing;
        for (int c = 0; c < C; ++c) out[c] = bias.value[c];
        for (int i = 0; i < ci; ++i)
          for (int w = 0; w < W; ++w) {
            const long num = u - w;
            if (num < 0 || num % k != 0) continue;
            const long j = num / k;
            if (j >= a->count) continue;
            const T xv = a->frame(a->count - 1 - j)[i];
            const T* kp = kt.data() + (static_cast<std::size_t>(i) * W + w) * C;
            for (int c = 0; c < C; ++c) out[c] += kp[c] * xv;
          }
        break;
      }
      case OpKind::leaky_relu: {
        const T* x = a->frame(0);
        for (int c = 0; c < C; ++c) out[c] = x[c] > T(0) ? x[c] : slope * x[c];
        break;
      }
      case OpKind::dropout:
      case OpKind::crop_to:
      case OpKind::decimate:
      case OpKind::repeat: {
        const T* x = a->frame(0);
        for (int c = 0; c < C; ++c) out[c] = x[c];
        break;
      }
      case OpKind::gate: {
        const T* x = a->frame(0);
        const T* y = b->frame(0);
        for (int c = 0; c < C; ++c) out[c] = std::tanh(x[c]) * sigmoid(y[c]);
        break;
      }
      case OpKind::add: {
        const T* x = a->frame(0);
        const T* y = b->frame(0);
        for (int c = 0; c < C; ++c) out[c] = x[c] + y[c];
        break;
      }
      case OpKind::concat: {
        const T* x = a->frame(0);
        const T* y = b->frame(0);
        for (int c = 0; c < a->channels; ++c) out[c] = x[c];
        for (int c = 0; c < b->channels; ++c) out[a->channels + c] = y[c];
        break;
      }
      case OpKind::tied_projection: {
        const Parameter<T>& table = model_->stored(n.kernel);
        const T* f = a->frame(0);
        const int E = a->channels;
        for (int v = 0; v < C; ++v) {
          const T* row = table.value.data() + static_cast<std::size_t>(v) * E;
          T acc = T(0);
          for (int e = 0; e < E; ++e) acc += row[e] * f[e];
          out[v] = acc;
        }
        break;
      }
    }
    T* dst = r.push();
    std::copy(out, out + C, dst);
  }
  const Ring& o = rings_[g.output];
  logits_.assign(o.frame(0), o.frame(0) + o.channels);
  last_levels_ = 0;
  for (int l = 1; l <= levels_; ++l)
    if (l <= max_clock && fired[l]) {
      ++updates_[l - 1];
      ++last_levels_;
    }
  if (g.config.variant != Variant::dilated_baseline && levels_ + 1 <= max_clock && fired[levels_ + 1])
    ++bottleneck_updates_;
  ++steps_;
  ++next_position_;
}

template <typename T>
double Stream<T>::amortized_updates() const {
  if (steps_ == 0) throw Error("amortized_updates: no steps taken");
  long total = 0;
  for (long u : updates_) total += u;
  return static_cast<double>(total) / static_cast<double>(steps_);
}

template class Stream<float>;
template class Stream<double>;

}  // namespace sequnet
