#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pan/grad_check.h"
#include "pan/model.h"
#include "pan/params.h"

namespace pan {

// Small fixture shared by the gradcheck command and the test suites:
// vocabulary 20, embedding width 8, 4 hidden units per direction, two
// sequences padded to 5 steps (lengths 5 and 3).
struct DownsizedProblem {
  ModelParams params;
  Batch batch;
  double pos_weight = 2.0;
  double l2 = 1e-3;
};

DownsizedProblem make_downsized_problem(std::uint64_t seed);

// Weighted BCE + L2 on the downsized problem with every stochastic
// regularizer off, checked against central differences with step epsilon.
GradCheckResult gradcheck_downsized(std::uint64_t seed, double epsilon = 1e-5);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Invariant suites: softmax normalization, attention convex hull, padding
// invariance, GRU state bounds, eval determinism, schedule trace, Adam
// fixed point, metric invariances and checkpoint round-trip.
std::vector<CheckOutcome> run_self_checks(std::uint64_t seed);

}  // namespace pan
