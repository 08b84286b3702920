#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "pan/tensor.h"

namespace pan {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t components_checked = 0;
};

// Builds the scalar loss from the current parameter values. When given a
// tape it must record onto it; it must be deterministic.
using LossFunction = std::function<Tensor(Tape*)>;

/// Compares the tape gradient of `loss` against central finite differences
/// (f(θ+ε) − f(θ−ε)) / 2ε for every component of every listed parameter.
/// Relative error uses max(|analytic|, |numeric|, 1e-8) as denominator.
/// Parameter values are restored afterwards; their grad buffers hold the
/// analytic gradient. Throws DeterminismError if two evaluations at the same
/// point disagree.
GradCheckResult grad_check(const LossFunction& loss, std::vector<NamedTensor> params,
                           double epsilon);

}  // namespace pan
