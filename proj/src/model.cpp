#include "pan/model.h"

#include <algorithm>
#include <string>

#include "pan/errors.h"
#include "pan/ops.h"
#include "pan/random.h"

namespace pan {

namespace {

struct InputProjections {
  Tensor r, z, n;
};

InputProjections project_inputs(const Tensor& x, const GruDirectionParams& p, Tape* tape) {
  if (x.cols() != p.input_size()) {
    throw DimensionError("GRU input width " + std::to_string(x.cols()) + " does not match " +
                         to_string(p.W_ir.shape()));
  }
  return {ops::add_row_bias(ops::matmul(x, p.W_ir, tape), p.b_ir, tape),
          ops::add_row_bias(ops::matmul(x, p.W_iz, tape), p.b_iz, tape),
          ops::add_row_bias(ops::matmul(x, p.W_in, tape), p.b_in, tape)};
}

Tensor gru_step(const InputProjections& in, const Tensor& h, const GruDirectionParams& p,
                Tape* tape) {
  using namespace ops;
  const Tensor r = sigmoid(add(in.r, add_row_bias(matmul(h, p.W_hr, tape), p.b_hr, tape), tape), tape);
  const Tensor z = sigmoid(add(in.z, add_row_bias(matmul(h, p.W_hz, tape), p.b_hz, tape), tape), tape);
  const Tensor hn = add_row_bias(matmul(h, p.W_hn, tape), p.b_hn, tape);
  const Tensor n = tanh(add(in.n, mul(r, hn, tape), tape), tape);
  // (1 - z) n + z h  ==  n + z (h - n)
  return add(n, mul(z, sub(h, n, tape), tape), tape);
}

Tensor scan_direction(const InputProjections& proj, std::size_t batch, std::size_t steps,
                      std::span<const std::uint8_t> mask, const GruDirectionParams& p,
                      bool reverse, Tape* tape) {
  Tensor h = Tensor::zeros({batch, p.hidden_size()});
  std::vector<Tensor> outputs(steps);
  std::vector<std::uint8_t> keep(batch);
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    for (std::size_t b = 0; b < batch; ++b) keep[b] = mask[b * steps + t];
    const InputProjections step{ops::slice_rows(proj.r, t * batch, batch, tape),
                                ops::slice_rows(proj.z, t * batch, batch, tape),
                                ops::slice_rows(proj.n, t * batch, batch, tape)};
    const Tensor candidate = gru_step(step, h, p, tape);
    h = ops::select_rows(keep, candidate, h, tape);
    outputs[t] = ops::mask_rows(h, keep, tape);
  }
  return ops::stack_rows(outputs, tape);
}

}  // namespace

std::vector<std::uint8_t> Batch::step_mask(std::size_t t) const {
  std::vector<std::uint8_t> m(size);
  for (std::size_t b = 0; b < size; ++b) m[b] = mask[b * steps + t];
  return m;
}

Batch make_batch(std::span<const Example* const> examples, std::size_t steps) {
  if (examples.empty()) throw ContractError("cannot build an empty batch");
  std::size_t longest = 0;
  for (const auto* ex : examples) {
    const std::size_t len = ex->length();
    if (len == 0) throw EmptySequenceError("example '" + ex->id + "' has no tokens");
    longest = std::max(longest, len);
  }
  if (steps == 0) steps = longest;
  if (steps < longest) throw DimensionError("forced batch length shorter than an example");

  Batch batch;
  batch.size = examples.size();
  batch.steps = steps;
  batch.indices.assign(batch.size * steps, Vocabulary::kPad);
  batch.mask.assign(batch.size * steps, 0);
  std::vector<double> labels(batch.size * kNumEmotions);
  for (std::size_t b = 0; b < batch.size; ++b) {
    const auto& ex = *examples[b];
    const std::size_t len = ex.length();
    for (std::size_t t = 0; t < len; ++t) {
      batch.indices[b * steps + t] = ex.indices[t];
      batch.mask[b * steps + t] = 1;
    }
    for (std::size_t k = 0; k < kNumEmotions; ++k) labels[b * kNumEmotions + k] = ex.labels[k];
  }
  batch.labels = Tensor::from({batch.size, kNumEmotions}, std::move(labels));
  return batch;
}

Batch make_batch(const std::vector<Example>& examples, std::size_t steps) {
  std::vector<const Example*> ptrs;
  ptrs.reserve(examples.size());
  for (const auto& ex : examples) ptrs.push_back(&ex);
  return make_batch(std::span<const Example* const>(ptrs), steps);
}

Tensor embed(std::span<const std::int32_t> indices, const Tensor& embedding, Tape* tape) {
  return ops::gather_rows(embedding, indices, tape);
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruDirectionParams& p, Tape* tape) {
  if (h_prev.cols() != p.hidden_size() || h_prev.rows() != x.rows()) {
    throw DimensionError("GRU hidden state " + to_string(h_prev.shape()) +
                         " does not match input " + to_string(x.shape()) + " and " +
                         to_string(p.W_hr.shape()));
  }
  return gru_step(project_inputs(x, p, tape), h_prev, p, tape);
}

Tensor bigru_layer(const Tensor& input, std::size_t batch, std::span<const std::uint8_t> mask,
                   const GruDirectionParams& fwd, const GruDirectionParams& bwd, Tape* tape) {
  if (batch == 0 || input.rows() % batch != 0) {
    throw DimensionError("sequence of " + std::to_string(input.rows()) +
                         " rows does not split into batch " + std::to_string(batch));
  }
  const std::size_t steps = input.rows() / batch;
  if (mask.size() != batch * steps) throw DimensionError("mask does not match sequence shape");
  const Tensor forward_out =
      scan_direction(project_inputs(input, fwd, tape), batch, steps, mask, fwd, false, tape);
  const Tensor backward_out =
      scan_direction(project_inputs(input, bwd, tape), batch, steps, mask, bwd, true, tape);
  return ops::concat_features({forward_out, backward_out}, tape);
}

PoolResult attention_pool(const Tensor& units, std::size_t batch,
                          std::span<const std::uint8_t> mask, const AttentionParams& p,
                          Tape* tape) {
  if (batch == 0 || units.rows() % batch != 0) {
    throw DimensionError("attention input of " + std::to_string(units.rows()) +
                         " rows does not split into batch " + std::to_string(batch));
  }
  const std::size_t steps = units.rows() / batch;
  Tensor scores = ops::add_scalar(ops::matmul(units, p.w_a, tape), p.b, tape);
  scores = ops::transpose(ops::reshape(scores, {steps, batch}, tape), tape);
  Tensor weights = ops::masked_softmax(scores, mask, tape);
  Tensor pooled = ops::pool_steps(weights, units, tape);
  return {pooled, weights};
}

ForwardResult forward(const ModelParams& params, const Batch& batch, Mode mode,
                      const Regularization& reg, Tape* tape) {
  const std::size_t B = batch.size, T = batch.steps;
  if (B == 0 || T == 0 || batch.indices.size() != B * T || batch.mask.size() != B * T) {
    throw DimensionError("malformed batch");
  }
  const bool training = mode == Mode::train;

  std::vector<std::int32_t> time_major(B * T);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < T; ++t) time_major[t * B + b] = batch.indices[b * T + t];

  Tensor x = embed(time_major, params.embedding, tape);
  x = apply_dropout(x, training ? reg.spatial_dropout : 0.0, mode,
                    derive_seed(reg.seed, "spatial_dropout"), DropoutVariant::spatial, B, tape);

  const ModelParams& p = params;
  ModelParams noisy;
  const ModelParams* active = &p;
  if (training && reg.weight_noise_std > 0.0) {
    noisy = perturb_hidden_weights(p, reg.weight_noise_std, derive_seed(reg.seed, "weight_noise"),
                                   tape);
    active = &noisy;
  }

  const Tensor h1 = bigru_layer(x, B, batch.mask, active->gru1_fwd, active->gru1_bwd, tape);
  const Tensor h2 = bigru_layer(h1, B, batch.mask, active->gru2_fwd, active->gru2_bwd, tape);

  const Tensor u1 = ops::concat_features({h1, x}, tape);
  const Tensor u2 = ops::concat_features({h2, h1, x}, tape);
  PoolResult v1 = attention_pool(u1, B, batch.mask, p.attn1, tape);
  PoolResult v2 = attention_pool(u2, B, batch.mask, p.attn2, tape);

  Tensor v = ops::concat_features({v1.pooled, v2.pooled}, tape);
  v = apply_dropout(v, training ? reg.dense_dropout : 0.0, mode,
                    derive_seed(reg.seed, "dense_dropout"), DropoutVariant::standard, 1, tape);
  Tensor logits = ops::add_row_bias(ops::matmul(v, p.W_d, tape), p.b_d, tape);
  return {ops::sigmoid(logits, tape), v1.weights, v2.weights};
}

}  // namespace pan
