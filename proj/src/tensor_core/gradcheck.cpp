#include "sequnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace sequnet {
namespace {

struct Eval {
  double loss;
  std::uint64_t kinks;
};

Eval evaluate(const LossBuilder& build) {
  Tape<double> tape(false);
  Var loss = build(tape);
  return {tape.scalar(loss), tape.kink_signature()};
}

}  // namespace

GradCheckResult grad_check(std::vector<Parameter<double>*> params, const LossBuilder& build,
                           const GradCheckOptions& options) {
  if (!(options.eps >= options.min_eps && options.min_eps > 0.0))
    throw ConfigError("grad_check: eps must be >= min_eps > 0");
  for (auto* p : params) p->zero_grad();
  std::uint64_t base_kinks = 0;
  {
    Tape<double> tape(true);
    Var loss = build(tape);
    base_kinks = tape.kink_signature();
    tape.backward(loss);
  }

  GradCheckResult result;
  for (auto* p : params) {
    double diff2 = 0.0;
    double a2 = 0.0;
    double n2 = 0.0;
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double original = p->value[i];
      bool accepted = false;
      double numeric = 0.0;
      for (double eps = options.eps; eps >= options.min_eps * 0.999; eps /= 10.0) {
        bool kinked = false;
        auto at = [&](double delta) {
          p->value[i] = original + delta;
          Eval e = evaluate(build);
          if (e.kinks != base_kinks) kinked = true;
          return e.loss;
        };
        if (options.high_order) {
          const double fp2 = at(2 * eps), fp1 = at(eps), fm1 = at(-eps), fm2 = at(-2 * eps);
          numeric = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * eps);
        } else {
          numeric = (at(eps) - at(-eps)) / (2 * eps);
        }
        p->value[i] = original;
        if (!kinked) {
          accepted = true;
          break;
        }
        ++result.retries;
      }
      if (!accepted) {
        ++result.skipped_elements;
        continue;
      }
      const double analytic = p->grad[i];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    }
    const double rel = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-8});
    result.per_param.push_back({p->name, rel});
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst = p->name;
    }
  }
  return result;
}

}  // namespace sequnet
