#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sequnet/tape.hpp"

namespace sequnet {

struct GradCheckOptions {
  double eps = 1e-5;
  // Retries with eps/10 while a perturbation flips the sign of any kinked
  // activation input, down to this floor.
  double min_eps = 1e-9;
  // Fourth-order central differences instead of second-order.
  bool high_order = true;
};

struct ParamError {
  std::string name;
  double rel_error = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;
  std::vector<ParamError> per_param;
  // Elements whose every eps still straddled a kink; excluded from the norms.
  int skipped_elements = 0;
  int retries = 0;
};

// Builds a scalar loss on the given tape from the current parameter values.
using LossBuilder = std::function<Var(Tape<double>&)>;

// Compares backward() against finite differences for every parameter in
// `params`. The error for one parameter is ||a - n|| / max(||a||, ||n||, 1e-8).
GradCheckResult grad_check(std::vector<Parameter<double>*> params, const LossBuilder& build,
                           const GradCheckOptions& options = {});

}  // namespace sequnet
