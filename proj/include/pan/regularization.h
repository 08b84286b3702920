#pragma once

#include <cstddef>
#include <cstdint>

#include "pan/params.h"
#include "pan/tensor.h"

namespace pan {

enum class Mode { train, eval };

enum class DropoutVariant {
  standard,  // independent scalar units
  spatial,   // whole feature channels per example, across every step
};

/// Inverted dropout: survivors are scaled by 1/(1-p) so eval mode is the
/// identity. For the spatial variant x is a time-major (T*B) x d sequence
/// and row r belongs to example r % examples; one keep/drop draw is made
/// per (example, channel).
Tensor apply_dropout(const Tensor& x, double p, Mode mode, std::uint64_t seed,
                     DropoutVariant variant, std::size_t examples = 1, Tape* tape = nullptr);

/// Adds fresh N(0, sigma^2) noise to W_hr, W_hz and W_hn of all four GRU
/// directions. The returned parameters share every other tensor with
/// `params`; the noisy matrices are op results on the tape, so gradients
/// land on the clean weights and the clean values never change.
ModelParams perturb_hidden_weights(const ModelParams& params, double sigma, std::uint64_t seed,
                                   Tape* tape = nullptr);

}  // namespace pan
