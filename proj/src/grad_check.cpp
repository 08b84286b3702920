#include "pan/grad_check.h"

#include <algorithm>
#include <cmath>

#include "pan/errors.h"

namespace pan {

namespace {

double evaluate(const LossFunction& loss) {
  Tensor value = loss(nullptr);
  return value.item();
}

}  // namespace

GradCheckResult grad_check(const LossFunction& loss, std::vector<NamedTensor> params,
                           double epsilon) {
  if (!(epsilon > 0.0)) throw ContractError("grad_check: step must be positive");

  const double base = evaluate(loss);
  if (const double again = evaluate(loss); again != base) {
    throw DeterminismError("grad_check: loss evaluated twice at the same point gave " +
                           std::to_string(base) + " and " + std::to_string(again));
  }

  for (auto& p : params) p.tensor.zero_grad();
  Tape tape;
  Tensor value = loss(&tape);
  tape.backward(value);

  GradCheckResult result;
  for (auto& p : params) {
    const auto analytic = p.tensor.grad();
    auto values = p.tensor.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + epsilon;
      const double up = evaluate(loss);
      values[i] = original - epsilon;
      const double down = evaluate(loss);
      values[i] = original;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic[i] - numeric) / denom;
      ++result.components_checked;
      if (result.worst_parameter.empty() || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.analytic = analytic[i];
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace pan
