#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pan/tensor.h"

// Differentiable operations over Tensor. Every op takes an optional Tape; when
// the tape is null, or no operand requires a gradient, nothing is recorded.
//
// Sequence tensors use a time-major flat layout: a batch of B sequences of T
// steps with d features is a (T*B)xd matrix whose row t*B+b holds step t of
// example b. Step t of every example is therefore a contiguous row block.
namespace pan::ops {

enum class Activation { sigmoid, tanh };

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor add(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor sub(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
Tensor mul(const Tensor& a, const Tensor& b, Tape* tape = nullptr);
// a + bias broadcast over rows; bias holds cols(a) values.
Tensor add_row_bias(const Tensor& a, const Tensor& bias, Tape* tape = nullptr);
// a + s for a one-element tensor s.
Tensor add_scalar(const Tensor& a, const Tensor& s, Tape* tape = nullptr);
// scale * a + shift with constant scale and shift.
Tensor affine(const Tensor& a, double scale, double shift, Tape* tape = nullptr);

Tensor activation(const Tensor& x, Activation kind, Tape* tape = nullptr);
inline Tensor sigmoid(const Tensor& x, Tape* tape = nullptr) {
  return activation(x, Activation::sigmoid, tape);
}
inline Tensor tanh(const Tensor& x, Tape* tape = nullptr) {
  return activation(x, Activation::tanh, tape);
}

// Row-wise softmax restricted to mask != 0 positions. scores is BxT (or a
// single row of T); mask has the same number of elements. Masked positions
// come out exactly 0. A row with no valid position is an EmptySequenceError.
Tensor masked_softmax(const Tensor& scores, std::span<const std::uint8_t> mask,
                      Tape* tape = nullptr);

// Feature-axis concatenation of matrices sharing a row count.
Tensor concat_features(const std::vector<Tensor>& parts, Tape* tape = nullptr);
// Row-axis concatenation of matrices sharing a column count.
Tensor stack_rows(const std::vector<Tensor>& parts, Tape* tape = nullptr);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count, Tape* tape = nullptr);
// out.row(i) = a.row(indices[i]); out-of-range indices are a LookupError.
Tensor gather_rows(const Tensor& a, std::span<const std::int32_t> indices,
                   Tape* tape = nullptr);
// out.row(r) = keep[r] ? a.row(r) : b.row(r)
Tensor select_rows(std::span<const std::uint8_t> keep, const Tensor& a, const Tensor& b,
                   Tape* tape = nullptr);
// Zeroes rows whose keep flag is 0.
Tensor mask_rows(const Tensor& a, std::span<const std::uint8_t> keep, Tape* tape = nullptr);

Tensor reshape(const Tensor& a, Shape shape, Tape* tape = nullptr);
Tensor transpose(const Tensor& a, Tape* tape = nullptr);

// weights is BxT, sequence is (T*B)xd in time-major layout; returns Bxd with
// out.row(b) = sum_t weights(b,t) * sequence.row(t*B+b).
Tensor pool_steps(const Tensor& weights, const Tensor& sequence, Tape* tape = nullptr);

Tensor sum(const Tensor& a, Tape* tape = nullptr);
Tensor sum_squares(const Tensor& a, Tape* tape = nullptr);

}  // namespace pan::ops
