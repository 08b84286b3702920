#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pan/dataset.h"
#include "pan/params.h"
#include "pan/regularization.h"
#include "pan/tensor.h"

namespace pan {

/// A padded batch in batch-major order: indices[b * steps + t].
struct Batch {
  std::size_t size = 0;
  std::size_t steps = 0;
  std::vector<std::int32_t> indices;
  std::vector<std::uint8_t> mask;
  Tensor labels;  // size x 11, 0/1

  // mask[b * steps + t] for every example at step t.
  std::vector<std::uint8_t> step_mask(std::size_t t) const;
};

// Builds a batch from prepared examples, trimming the step count to the
// longest example. `steps`, when non-zero, forces the padded length instead.
Batch make_batch(std::span<const Example* const> examples, std::size_t steps = 0);
Batch make_batch(const std::vector<Example>& examples, std::size_t steps = 0);

// Stochastic regularizers used in train mode; ignored in eval mode.
struct Regularization {
  double spatial_dropout = 0.0;
  double dense_dropout = 0.0;
  double weight_noise_std = 0.0;
  std::uint64_t seed = 0;
};

struct ForwardResult {
  Tensor probabilities;  // batch x labels
  Tensor attention1;     // batch x steps
  Tensor attention2;     // batch x steps
};

// Row lookup of time-major indices into the frozen embedding: (T*B) x d.
Tensor embed(std::span<const std::int32_t> indices, const Tensor& embedding, Tape* tape = nullptr);

/// One GRU step for a batch of rows:
///   r = σ(x W_ir + b_ir + h W_hr + b_hr)
///   z = σ(x W_iz + b_iz + h W_hz + b_hz)
///   n = tanh(x W_in + b_in + r ⊙ (h W_hn + b_hn))
///   h' = (1 − z) ⊙ n + z ⊙ h
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruDirectionParams& p,
                Tape* tape = nullptr);

/// Bidirectional GRU over a time-major (T*B) x d_in sequence. Output row t*B+b
/// is [h_fwd ; h_bwd]. Masked steps leave the hidden state untouched and emit
/// zeros, so the backward scan effectively starts at the last valid token.
Tensor bigru_layer(const Tensor& input, std::size_t batch, std::span<const std::uint8_t> mask,
                   const GruDirectionParams& fwd, const GruDirectionParams& bwd,
                   Tape* tape = nullptr);

struct PoolResult {
  Tensor pooled;   // batch x d_u
  Tensor weights;  // batch x steps
};

// e_i = u_i . w_a + b, a = masked softmax(e), V = Σ a_i u_i. `mask` is
// batch-major; `units` is time-major (T*B) x d_u.
PoolResult attention_pool(const Tensor& units, std::size_t batch,
                          std::span<const std::uint8_t> mask, const AttentionParams& p,
                          Tape* tape = nullptr);

/// Full pyramid-attention forward pass:
///   X  = embed(batch)                       (spatial dropout in train mode)
///   H1 = bigru1(X), H2 = bigru2(H1)
///   V1 = attend([H1, X]), V2 = attend([H2, H1, X])
///   ŷ  = σ(dropout([V1, V2]) W_d + b_d)
/// In train mode the GRU hidden weights also receive Gaussian noise. All
/// randomness is derived from reg.seed.
ForwardResult forward(const ModelParams& params, const Batch& batch, Mode mode,
                      const Regularization& reg = {}, Tape* tape = nullptr);

}  // namespace pan
