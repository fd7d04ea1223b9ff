#include "sequnet/optim.hpp"

#include <cmath>

namespace sequnet {

Adam::Adam(ParameterStore<float>& params, AdamConfig config) : params_(&params), config_(config) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (config_.clip && !(*config_.clip > 0.0)) throw ConfigError("clip magnitude must be > 0");
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].size(), 0.0f);
    v_.emplace_back(params[i].size(), 0.0f);
  }
}

void Adam::step() {
  auto& ps = *params_;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (float g : ps[i].grad) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + ps[i].name);
      norm2 += static_cast<double>(g) * g;
    }
  }
  last_norm_ = std::sqrt(norm2);
  double scale = 1.0;
  if (config_.clip && !config_.clip_by_value && last_norm_ > *config_.clip) scale = *config_.clip / last_norm_;
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto& p = ps[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      double g = static_cast<double>(p.grad[j]) * scale;
      if (config_.clip && config_.clip_by_value) g = std::clamp(g, -*config_.clip, *config_.clip);
      m[j] = static_cast<float>(b1 * m[j] + (1.0 - b1) * g);
      v[j] = static_cast<float>(b2 * v[j] + (1.0 - b2) * g * g);
      const double mh = m[j] / c1;
      const double vh = v[j] / c2;
      p.value[j] = static_cast<float>(p.value[j] - config_.learning_rate * mh / (std::sqrt(vh) + config_.epsilon));
    }
  }
}

void Adam::export_state(OptimizerSection& out) const {
  out.step = t_;
  out.learning_rate = config_.learning_rate;
  out.first_moment = m_;
  out.second_moment = v_;
}

void Adam::import_state(const OptimizerSection& in) {
  if (in.first_moment.size() != m_.size() || in.second_moment.size() != v_.size())
    throw ShapeError("optimizer state does not match the parameter set");
  for (std::size_t i = 0; i < m_.size(); ++i)
    if (in.first_moment[i].size() != m_[i].size() || in.second_moment[i].size() != v_[i].size())
      throw ShapeError("optimizer state size mismatch for " + (*params_)[i].name);
  t_ = in.step;
  config_.learning_rate = in.learning_rate;
  m_ = in.first_moment;
  v_ = in.second_moment;
}

PlateauSchedule::PlateauSchedule(double learning_rate, int patience, int guard_epochs)
    : lr_(learning_rate), patience_(patience), guard_(guard_epochs) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

double PlateauSchedule::on_epoch_end(double metric, int epoch) {
  if (metric < best_) {
    best_ = metric;
    stalled_ = 0;
  } else {
    ++stalled_;
  }
  if (stalled_ >= patience_ && epoch > guard_) {
    lr_ *= 0.5;
    stalled_ = 0;
  }
  return lr_;
}

}  // namespace sequnet
