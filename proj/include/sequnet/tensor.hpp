#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sequnet/errors.hpp"

namespace sequnet {

// Dense [channels x time] block stored row-major by channel.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(int channels, int time, T fill = T(0))
      : channels_(channels), time_(time), data_(static_cast<std::size_t>(channels) * time, fill) {
    if (channels < 0 || time < 0) throw ShapeError("negative tensor extent");
  }
  Tensor(int channels, int time, std::vector<T> values)
      : channels_(channels), time_(time), data_(std::move(values)) {
    if (channels < 0 || time < 0) throw ShapeError("negative tensor extent");
    if (data_.size() != static_cast<std::size_t>(channels) * time)
      throw ShapeError("value count does not match channels x time");
  }

  int channels() const { return channels_; }
  int time() const { return time_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int c, int t) { return data_[static_cast<std::size_t>(c) * time_ + t]; }
  const T& at(int c, int t) const { return data_[static_cast<std::size_t>(c) * time_ + t]; }

  std::span<T> row(int c) { return {data_.data() + static_cast<std::size_t>(c) * time_, static_cast<std::size_t>(time_)}; }
  std::span<const T> row(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * time_, static_cast<std::size_t>(time_)};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Tensor& other) const { return channels_ == other.channels_ && time_ == other.time_; }

  // Column t as a contiguous frame.
  std::vector<T> frame(int t) const {
    std::vector<T> out(channels_);
    for (int c = 0; c < channels_; ++c) out[c] = at(c, t);
    return out;
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> v(data_.begin(), data_.end());
    return Tensor<U>(channels_, time_, std::move(v));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  int channels_ = 0;
  int time_ = 0;
  std::vector<T> data_;
};

// Trainable value block with a gradient accumulator of identical shape.
// Convolution kernels are [out][in][width], biases [out], tables [rows][cols].
template <typename T>
struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<T> value;
  std::vector<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    const std::size_t count = element_count(shape);
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }

  std::size_t size() const { return value.size(); }
  int dim(std::size_t i) const { return i < shape.size() ? shape[i] : 1; }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }

  static std::size_t element_count(const std::vector<int>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
  }
};

// Ordered registry of uniquely named parameters. Addresses are stable.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore& other) { *this = other; }
  ParameterStore& operator=(const ParameterStore& other) {
    if (this == &other) return *this;
    params_.clear();
    index_.clear();
    for (const auto& p : other.params_) {
      auto& added = add(p->name, p->shape);
      added.value = p->value;
      added.grad = p->grad;
    }
    return *this;
  }
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter<T>& add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    index_[name] = params_.size();
    params_.push_back(std::make_unique<Parameter<T>>(name, std::move(shape)));
    return *params_.back();
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  Parameter<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  void zero_grads() {
    for (auto& p : params_) p->zero_grad();
  }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->size();
    return n;
  }

  std::vector<Parameter<T>*> pointers() {
    std::vector<Parameter<T>*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& p : params_) {
      auto& q = out.add(p->name, p->shape);
      std::copy(p->value.begin(), p->value.end(), q.value.begin());
    }
    return out;
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sequnet
