#include "sequnet/ops.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace sequnet {
namespace {

template <typename T>
void check_kernel(const Parameter<T>& kernel, const Parameter<T>& bias, int in_channels, const char* op) {
  if (kernel.shape.size() != 3) throw ShapeError(std::string(op) + ": kernel must be [out][in][width]");
  if (kernel.shape[1] != in_channels)
    throw ShapeError(std::string(op) + ": kernel expects " + std::to_string(kernel.shape[1]) +
                     " input channels, got " + std::to_string(in_channels));
  if (bias.size() != static_cast<std::size_t>(kernel.shape[0]))
    throw ShapeError(std::string(op) + ": bias length does not match output channels");
}

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace

template <typename T>
Var conv1d_valid(Tape<T>& tape, Var x, Parameter<T>& kernel, Parameter<T>& bias, int stride, int dilation) {
  const Tensor<T>& in = tape.value(x);
  check_kernel(kernel, bias, in.channels(), "conv1d_valid");
  if (stride < 1 || dilation < 1) throw ShapeError("conv1d_valid: stride and dilation must be >= 1");
  const int co = kernel.shape[0];
  const int ci = kernel.shape[1];
  const int width = kernel.shape[2];
  const long out_time = conv_output_length(in.time(), width, stride, dilation);
  if (out_time < 1) throw InsufficientLength(static_cast<long>(width - 1) * dilation + 1, in.time(), "conv1d_valid");

  Tensor<T> out(co, static_cast<int>(out_time));
  const int to = out.time();
  for (int c = 0; c < co; ++c) {
    T* o = out.row(c).data();
    std::fill(o, o + to, bias.value[c]);
    for (int i = 0; i < ci; ++i) {
      const T* xr = in.row(i).data();
      for (int w = 0; w < width; ++w) {
        const T k = kernel.value[(static_cast<std::size_t>(c) * ci + i) * width + w];
        const T* xp = xr + static_cast<std::size_t>(w) * dilation;
        if (stride == 1) {
          for (int t = 0; t < to; ++t) o[t] += k * xp[t];
        } else {
          for (int t = 0; t < to; ++t) o[t] += k * xp[static_cast<std::size_t>(t) * stride];
        }
      }
    }
  }

  Parameter<T>* kp = &kernel;
  Parameter<T>* bp = &bias;
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& xin = tp.value(x);
    Tensor<T>& gx = tp.grad(x);
    for (int c = 0; c < co; ++c) {
      const T* gr = g.row(c).data();
      T gsum = T(0);
      for (int t = 0; t < to; ++t) gsum += gr[t];
      bp->grad[c] += gsum;
      for (int i = 0; i < ci; ++i) {
        const T* xr = xin.row(i).data();
        T* gxr = gx.row(i).data();
        for (int w = 0; w < width; ++w) {
          const std::size_t ki = (static_cast<std::size_t>(c) * ci + i) * width + w;
          const T k = kp->value[ki];
          const std::size_t off = static_cast<std::size_t>(w) * dilation;
          T acc = T(0);
          if (stride == 1) {
            for (int t = 0; t < to; ++t) {
              acc += gr[t] * xr[off + t];
              gxr[off + t] += k * gr[t];
            }
          } else {
            for (int t = 0; t < to; ++t) {
              const std::size_t xi = off + static_cast<std::size_t>(t) * stride;
              acc += gr[t] * xr[xi];
              gxr[xi] += k * gr[t];
            }
          }
          kp->grad[ki] += acc;
        }
      }
    }
  });
}

template <typename T>
Var conv1d_transposed(Tape<T>& tape, Var x, Parameter<T>& kernel, Parameter<T>& bias, int stride,
                      std::optional<int> out_time) {
  const Tensor<T>& in = tape.value(x);
  check_kernel(kernel, bias, in.channels(), "conv1d_transposed");
  if (stride < 1) throw ShapeError("conv1d_transposed: stride must be >= 1");
  if (in.time() < 1) throw InsufficientLength(1, in.time(), "conv1d_transposed");
  const int co = kernel.shape[0];
  const int ci = kernel.shape[1];
  const int width = kernel.shape[2];
  const int n = in.time();
  const int to = out_time ? *out_time : static_cast<int>(transposed_output_length(n, width, stride));
  if (to < 0) throw ShapeError("conv1d_transposed: negative output length");

  Tensor<T> out(co, to);
  for (int c = 0; c < co; ++c) {
    T* o = out.row(c).data();
    std::fill(o, o + to, bias.value[c]);
    for (int i = 0; i < ci; ++i) {
      const T* xr = in.row(i).data();
      for (int w = 0; w < width; ++w) {
        const T k = kernel.value[(static_cast<std::size_t>(c) * ci + i) * width + w];
        for (int j = 0; j < n; ++j) {
          const long u = static_cast<long>(j) * stride + w;
          if (u >= to) break;
          o[u] += k * xr[j];
        }
      }
    }
  }

  Parameter<T>* kp = &kernel;
  Parameter<T>* bp = &bias;
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& xin = tp.value(x);
    Tensor<T>& gx = tp.grad(x);
    for (int c = 0; c < co; ++c) {
      const T* gr = g.row(c).data();
      T gsum = T(0);
      for (int u = 0; u < to; ++u) gsum += gr[u];
      bp->grad[c] += gsum;
      for (int i = 0; i < ci; ++i) {
        const T* xr = xin.row(i).data();
        T* gxr = gx.row(i).data();
        for (int w = 0; w < width; ++w) {
          const std::size_t ki = (static_cast<std::size_t>(c) * ci + i) * width + w;
          const T k = kp->value[ki];
          T acc = T(0);
          for (int j = 0; j < n; ++j) {
            const long u = static_cast<long>(j) * stride + w;
            if (u >= to) break;
            acc += gr[u] * xr[j];
            gxr[j] += k * gr[u];
          }
          kp->grad[ki] += acc;
        }
      }
    }
  });
}

template <typename T>
Var crop_front(Tape<T>& tape, Var x, int n) {
  const Tensor<T>& in = tape.value(x);
  if (n < 0) throw ShapeError("crop_front: negative crop");
  if (n > in.time()) throw CropError(n, in.time());
  if (n == 0) return x;
  const int to = in.time() - n;
  Tensor<T> out(in.channels(), to);
  for (int c = 0; c < in.channels(); ++c) std::copy_n(in.row(c).data() + n, to, out.row(c).data());
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    Tensor<T>& gx = tp.grad(x);
    for (int c = 0; c < g.channels(); ++c) {
      const T* gr = g.row(c).data();
      T* gxr = gx.row(c).data() + n;
      for (int t = 0; t < to; ++t) gxr[t] += gr[t];
    }
  });
}

template <typename T>
Var gather_frames(Tape<T>& tape, Var x, std::vector<int> indices) {
  const Tensor<T>& in = tape.value(x);
  const int to = static_cast<int>(indices.size());
  for (int idx : indices)
    if (idx < 0 || idx >= in.time())
      throw IndexError("gather_frames: frame index " + std::to_string(idx) + " outside [0, " +
                       std::to_string(in.time()) + ")");
  Tensor<T> out(in.channels(), to);
  for (int c = 0; c < in.channels(); ++c) {
    const T* xr = in.row(c).data();
    T* o = out.row(c).data();
    for (int t = 0; t < to; ++t) o[t] = xr[indices[t]];
  }
  auto idx = std::make_shared<std::vector<int>>(std::move(indices));
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    Tensor<T>& gx = tp.grad(x);
    for (int c = 0; c < g.channels(); ++c) {
      const T* gr = g.row(c).data();
      T* gxr = gx.row(c).data();
      for (int t = 0; t < to; ++t) gxr[(*idx)[t]] += gr[t];
    }
  });
}

template <typename T>
Var concat_channels(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& ta = tape.value(a);
  const Tensor<T>& tb = tape.value(b);
  if (ta.time() != tb.time())
    throw AlignmentError("concat of " + std::to_string(ta.time()) + " and " + std::to_string(tb.time()) + " frames");
  const int ca = ta.channels();
  const int cb = tb.channels();
  const int time = ta.time();
  Tensor<T> out(ca + cb, time);
  std::copy(ta.data().begin(), ta.data().end(), out.data().begin());
  std::copy(tb.data().begin(), tb.data().end(), out.data().begin() + ta.size());
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const std::size_t split = static_cast<std::size_t>(ca) * time;
    if (ca > 0) {
      Tensor<T>& ga = tp.grad(a);
      for (std::size_t i = 0; i < split; ++i) ga.data()[i] += g.data()[i];
    }
    if (cb > 0) {
      Tensor<T>& gb = tp.grad(b);
      for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] += g.data()[split + i];
    }
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& ta = tape.value(a);
  const Tensor<T>& tb = tape.value(b);
  if (!ta.same_shape(tb))
    throw AlignmentError("add of " + std::to_string(ta.channels()) + "x" + std::to_string(ta.time()) + " and " +
                         std::to_string(tb.channels()) + "x" + std::to_string(tb.time()));
  Tensor<T> out(ta.channels(), ta.time());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = ta.data()[i] + tb.data()[i];
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    Tensor<T>& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
    Tensor<T>& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb.data()[i] += g.data()[i];
  });
}

template <typename T>
Var leaky_relu(Tape<T>& tape, Var x, T slope) {
  const Tensor<T>& in = tape.value(x);
  tape.mix_kinks(in);
  Tensor<T> out(in.channels(), in.time());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const T v = in.data()[i];
    out.data()[i] = v > T(0) ? v : slope * v;
  }
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& xin = tp.value(x);
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += xin.data()[i] > T(0) ? g.data()[i] : slope * g.data()[i];
  });
}

template <typename T>
Var tanh_act(Tape<T>& tape, Var x) {
  const Tensor<T>& in = tape.value(x);
  Tensor<T> out(in.channels(), in.time());
  for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = std::tanh(in.data()[i]);
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& y = tp.value(result);
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i] * (T(1) - y.data()[i] * y.data()[i]);
  });
}

template <typename T>
Var sigmoid_act(Tape<T>& tape, Var x) {
  const Tensor<T>& in = tape.value(x);
  Tensor<T> out(in.channels(), in.time());
  for (std::size_t i = 0; i < in.size(); ++i) out.data()[i] = sigmoid(in.data()[i]);
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& y = tp.value(result);
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i] * y.data()[i] * (T(1) - y.data()[i]);
  });
}

template <typename T>
Var gated_activation(Tape<T>& tape, Var a, Var b) {
  const Tensor<T>& ta = tape.value(a);
  const Tensor<T>& tb = tape.value(b);
  if (!ta.same_shape(tb)) throw ShapeError("gated_activation: operand shapes differ");
  Tensor<T> out(ta.channels(), ta.time());
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(ta.data()[i]) * sigmoid(tb.data()[i]);
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& va = tp.value(a);
    const Tensor<T>& vb = tp.value(b);
    Tensor<T>& ga = tp.grad(a);
    Tensor<T>& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T th = std::tanh(va.data()[i]);
      const T sg = sigmoid(vb.data()[i]);
      ga.data()[i] += g.data()[i] * (T(1) - th * th) * sg;
      gb.data()[i] += g.data()[i] * th * sg * (T(1) - sg);
    }
  });
}

template <typename T>
Var dropout(Tape<T>& tape, Var x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const Tensor<T>& in = tape.value(x);
  auto mask = std::make_shared<std::vector<T>>(in.size());
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Tensor<T> out(in.channels(), in.time());
  for (std::size_t i = 0; i < in.size(); ++i) {
    (*mask)[i] = uniform(rng) < p ? T(0) : scale;
    out.data()[i] = in.data()[i] * (*mask)[i];
  }
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.data()[i] += g.data()[i] * (*mask)[i];
  });
}

template <typename T>
Var embedding_lookup(Tape<T>& tape, Parameter<T>& table, std::span<const int> indices) {
  if (table.shape.size() != 2) throw ShapeError("embedding table must be [V][E]");
  const int vocab = table.shape[0];
  const int dim = table.shape[1];
  auto idx = std::make_shared<std::vector<int>>(indices.begin(), indices.end());
  for (int v : *idx)
    if (v < 0 || v >= vocab)
      throw IndexError("embedding index " + std::to_string(v) + " outside [0, " + std::to_string(vocab) + ")");
  const int time = static_cast<int>(idx->size());
  Tensor<T> out(dim, time);
  for (int t = 0; t < time; ++t)
    for (int e = 0; e < dim; ++e) out.at(e, t) = table.value[static_cast<std::size_t>((*idx)[t]) * dim + e];
  Parameter<T>* tp_ = &table;
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    for (int t = 0; t < time; ++t)
      for (int e = 0; e < dim; ++e) tp_->grad[static_cast<std::size_t>((*idx)[t]) * dim + e] += g.at(e, t);
  });
}

template <typename T>
Var tied_projection(Tape<T>& tape, Var features, Parameter<T>& table) {
  const Tensor<T>& f = tape.value(features);
  if (table.shape.size() != 2) throw ShapeError("embedding table must be [V][E]");
  const int vocab = table.shape[0];
  const int dim = table.shape[1];
  if (f.channels() != dim)
    throw ShapeError("tied_projection: features have " + std::to_string(f.channels()) + " channels, table has " +
                     std::to_string(dim));
  const int time = f.time();
  Tensor<T> out(vocab, time);
  for (int v = 0; v < vocab; ++v) {
    T* o = out.row(v).data();
    for (int e = 0; e < dim; ++e) {
      const T k = table.value[static_cast<std::size_t>(v) * dim + e];
      const T* fr = f.row(e).data();
      for (int t = 0; t < time; ++t) o[t] += k * fr[t];
    }
  }
  Parameter<T>* tbl = &table;
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    const Tensor<T>& fv = tp.value(features);
    Tensor<T>& gf = tp.grad(features);
    for (int v = 0; v < vocab; ++v) {
      const T* gr = g.row(v).data();
      for (int e = 0; e < dim; ++e) {
        const std::size_t ki = static_cast<std::size_t>(v) * dim + e;
        const T k = tbl->value[ki];
        const T* fr = fv.row(e).data();
        T* gfr = gf.row(e).data();
        T acc = T(0);
        for (int t = 0; t < time; ++t) {
          acc += gr[t] * fr[t];
          gfr[t] += k * gr[t];
        }
        tbl->grad[ki] += acc;
      }
    }
  });
}

template <typename T>
Var softmax_cross_entropy(Tape<T>& tape, Var logits, std::span<const int> targets) {
  const Tensor<T>& z = tape.value(logits);
  const int time = z.time();
  const int vocab = z.channels();
  if (targets.empty() || time == 0) throw ShapeError("softmax_cross_entropy: empty target sequence");
  if (static_cast<int>(targets.size()) != time)
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(time) + " frames");
  for (int y : targets)
    if (y < 0 || y >= vocab) throw IndexError("target " + std::to_string(y) + " outside vocabulary");
  auto tgt = std::make_shared<std::vector<int>>(targets.begin(), targets.end());
  double total = 0.0;
  for (int t = 0; t < time; ++t) {
    T mx = z.at(0, t);
    for (int v = 1; v < vocab; ++v) mx = std::max(mx, z.at(v, t));
    double s = 0.0;
    for (int v = 0; v < vocab; ++v) s += std::exp(static_cast<double>(z.at(v, t) - mx));
    total += std::log(s) + static_cast<double>(mx) - static_cast<double>(z.at((*tgt)[t], t));
  }
  Tensor<T> out(1, 1, static_cast<T>(total / time));
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const T g = tp.grad(result).data()[0] / static_cast<T>(time);
    const Tensor<T>& zv = tp.value(logits);
    Tensor<T>& gz = tp.grad(logits);
    for (int t = 0; t < time; ++t) {
      T mx = zv.at(0, t);
      for (int v = 1; v < vocab; ++v) mx = std::max(mx, zv.at(v, t));
      T s = T(0);
      for (int v = 0; v < vocab; ++v) s += std::exp(zv.at(v, t) - mx);
      for (int v = 0; v < vocab; ++v) {
        const T p = std::exp(zv.at(v, t) - mx) / s;
        gz.at(v, t) += g * (p - (v == (*tgt)[t] ? T(1) : T(0)));
      }
    }
  });
}

template <typename T>
Var binary_cross_entropy_sum(Tape<T>& tape, Var logits, const Tensor<T>& targets) {
  const Tensor<T>& z = tape.value(logits);
  if (!z.same_shape(targets)) throw ShapeError("binary_cross_entropy_sum: logits and targets differ in shape");
  const int time = z.time();
  if (time == 0) throw ShapeError("binary_cross_entropy_sum: no frames");
  for (const T& y : targets.data())
    if (y != T(0) && y != T(1)) throw ShapeError("binary_cross_entropy_sum: targets must be 0 or 1");
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = z.data()[i];
    total += std::max(zi, 0.0) - zi * static_cast<double>(targets.data()[i]) + std::log1p(std::exp(-std::abs(zi)));
  }
  auto y = std::make_shared<Tensor<T>>(targets);
  Tensor<T> out(1, 1, static_cast<T>(total / time));
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(out), [=](Tape<T>& tp) {
    const T g = tp.grad(result).data()[0] / static_cast<T>(time);
    const Tensor<T>& zv = tp.value(logits);
    Tensor<T>& gz = tp.grad(logits);
    for (std::size_t i = 0; i < zv.size(); ++i) gz.data()[i] += g * (sigmoid(zv.data()[i]) - y->data()[i]);
  });
}

template <typename T>
Var weighted_sum(Tape<T>& tape, Var x, const Tensor<T>& weights) {
  const Tensor<T>& in = tape.value(x);
  if (!in.same_shape(weights)) throw ShapeError("weighted_sum: shape mismatch");
  T s = T(0);
  for (std::size_t i = 0; i < in.size(); ++i) s += in.data()[i] * weights.data()[i];
  auto w = std::make_shared<Tensor<T>>(weights);
  Var result{static_cast<int>(tape.size())};
  return tape.record(Tensor<T>(1, 1, s), [=](Tape<T>& tp) {
    const T g = tp.grad(result).data()[0];
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g * w->data()[i];
  });
}

template <typename T>
Var parameter_leaf(Tape<T>& tape, Parameter<T>& p, int channels, int time) {
  Tensor<T> v(channels, time, p.value);
  Parameter<T>* pp = &p;
  Var result{static_cast<int>(tape.size())};
  return tape.record(std::move(v), [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(result);
    for (std::size_t i = 0; i < g.size(); ++i) pp->grad[i] += g.data()[i];
  });
}

#define SEQUNET_INSTANTIATE_OPS(T)                                                                      \
  template Var conv1d_valid<T>(Tape<T>&, Var, Parameter<T>&, Parameter<T>&, int, int);                 \
  template Var conv1d_transposed<T>(Tape<T>&, Var, Parameter<T>&, Parameter<T>&, int, std::optional<int>); \
  template Var crop_front<T>(Tape<T>&, Var, int);                                                       \
  template Var gather_frames<T>(Tape<T>&, Var, std::vector<int>);                                       \
  template Var concat_channels<T>(Tape<T>&, Var, Var);                                                  \
  template Var add<T>(Tape<T>&, Var, Var);                                                              \
  template Var leaky_relu<T>(Tape<T>&, Var, T);                                                         \
  template Var tanh_act<T>(Tape<T>&, Var);                                                              \
  template Var sigmoid_act<T>(Tape<T>&, Var);                                                           \
  template Var gated_activation<T>(Tape<T>&, Var, Var);                                                 \
  template Var dropout<T>(Tape<T>&, Var, double, bool, std::mt19937_64&);                               \
  template Var embedding_lookup<T>(Tape<T>&, Parameter<T>&, std::span<const int>);                      \
  template Var tied_projection<T>(Tape<T>&, Var, Parameter<T>&);                                        \
  template Var softmax_cross_entropy<T>(Tape<T>&, Var, std::span<const int>);                           \
  template Var binary_cross_entropy_sum<T>(Tape<T>&, Var, const Tensor<T>&);                            \
  template Var weighted_sum<T>(Tape<T>&, Var, const Tensor<T>&);                                        \
  template Var parameter_leaf<T>(Tape<T>&, Parameter<T>&, int, int);

SEQUNET_INSTANTIATE_OPS(float)
SEQUNET_INSTANTIATE_OPS(double)

}  // namespace sequnet
