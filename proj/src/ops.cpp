#include "pan/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pan/errors.h"

namespace pan::ops {

namespace {

bool tracks(const Tape* tape, std::initializer_list<const Tensor*> operands) {
  if (!tape) return false;
  return std::any_of(operands.begin(), operands.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

void require_matrix(const Tensor& a, const char* op) {
  if (a.rank() > 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + to_string(a.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                         " vs " + to_string(b.shape()));
  }
}

// Elementwise binary op whose partials depend only on the operand values.
template <typename Forward, typename DLeft, typename DRight>
Tensor elementwise(const Tensor& a, const Tensor& b, Tape* tape, const char* name,
                   Forward f, DLeft da, DRight db) {
  require_same_shape(a, b, name);
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i], bv[i]);
  const bool grad = tracks(tape, {&a, &b});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    tape->record([a, b, result, da, db]() mutable {
      const auto g = result.grad_buffer();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * da(av[i], bv[i]);
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * db(av[i], bv[i]);
      }
    });
  }
  return result;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b, Tape* tape) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree for " + to_string(a.shape()) +
                         " x " + to_string(b.shape()));
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  const bool grad = tracks(tape, {&a, &b});
  Tensor result = Tensor::result({m, n}, std::move(out), grad);
  if (grad) {
    tape->record([a, b, result, m, k, n]() mutable {
      const auto g = result.grad_buffer();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = g.data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = bv.data() + p * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
            ga[i * k + p] += s;
          }
        }
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = g.data() + i * n;
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            double* gbrow = gb.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
        }
      }
    });
  }
  return result;
}

Tensor add(const Tensor& a, const Tensor& b, Tape* tape) {
  return elementwise(
      a, b, tape, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b, Tape* tape) {
  return elementwise(
      a, b, tape, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b, Tape* tape) {
  return elementwise(
      a, b, tape, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor add_row_bias(const Tensor& a, const Tensor& bias, Tape* tape) {
  require_matrix(a, "add_row_bias");
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.size() != n) {
    throw DimensionError("add_row_bias: bias " + to_string(bias.shape()) +
                         " does not match columns of " + to_string(a.shape()));
  }
  const auto av = a.values();
  const auto bv = bias.values();
  std::vector<double> out(av.begin(), av.end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
  const bool grad = tracks(tape, {&a, &bias});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    tape->record([a, bias, result, m, n]() mutable {
      const auto g = result.grad_buffer();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      }
    });
  }
  return result;
}

Tensor add_scalar(const Tensor& a, const Tensor& s, Tape* tape) {
  if (s.size() != 1) throw DimensionError("add_scalar: expected one element, got " + to_string(s.shape()));
  const double sv = s.item();
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sv;
  const bool grad = tracks(tape, {&a, &s});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    tape->record([a, s, result]() mutable {
      const auto g = result.grad_buffer();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (s.requires_grad()) {
        double total = 0.0;
        for (double v : g) total += v;
        s.grad_buffer()[0] += total;
      }
    });
  }
  return result;
}

Tensor affine(const Tensor& a, double scale, double shift, Tape* tape) {
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * av[i] + shift;
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    tape->record([a, result, scale]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += scale * g[i];
    });
  }
  return result;
}

Tensor activation(const Tensor& x, Activation kind, Tape* tape) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  if (kind == Activation::sigmoid) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  }
  const bool grad = tracks(tape, {&x});
  Tensor result = Tensor::result(x.shape(), std::move(out), grad);
  if (grad) {
    tape->record([x, result, kind]() mutable {
      const auto g = result.grad_buffer();
      const auto y = result.values();
      auto gx = x.grad_buffer();
      if (kind == Activation::sigmoid) {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
      }
    });
  }
  return result;
}

Tensor masked_softmax(const Tensor& scores, std::span<const std::uint8_t> mask, Tape* tape) {
  require_matrix(scores, "masked_softmax");
  const std::size_t rows = scores.rows(), cols = scores.cols();
  if (mask.size() != scores.size()) {
    throw DimensionError("masked_softmax: mask has " + std::to_string(mask.size()) +
                         " entries for scores " + to_string(scores.shape()));
  }
  const auto sv = scores.values();
  std::vector<double> out(sv.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t base = r * cols;
    double top = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask[base + c]) {
        top = std::max(top, sv[base + c]);
        any = true;
      }
    }
    if (!any) {
      throw EmptySequenceError("masked_softmax: row " + std::to_string(r) +
                               " has no valid position");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask[base + c]) {
        out[base + c] = std::exp(sv[base + c] - top);
        total += out[base + c];
      }
    }
    for (std::size_t c = 0; c < cols; ++c) out[base + c] /= total;
  }
  const bool grad = tracks(tape, {&scores});
  Tensor result = Tensor::result(scores.shape(), std::move(out), grad);
  if (grad) {
    tape->record([scores, result, rows, cols]() mutable {
      // d e_i = a_i (g_i - sum_j a_j g_j); masked a_j are 0 so they drop out.
      const auto g = result.grad_buffer();
      const auto a = result.values();
      auto gs = scores.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += a[base + c] * g[base + c];
        for (std::size_t c = 0; c < cols; ++c) gs[base + c] += a[base + c] * (g[base + c] - dot);
      }
    });
  }
  return result;
}

Tensor concat_features(const std::vector<Tensor>& parts, Tape* tape) {
  if (parts.empty()) throw DimensionError("concat_features: no parts");
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_features");
    if (p.rows() != rows) {
      throw DimensionError("concat_features: leading dimension mismatch " +
                           to_string(parts.front().shape()) + " vs " + to_string(p.shape()));
    }
    total += p.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto pv = p.values();
    const std::size_t w = p.cols();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(pv.data() + r * w, w, out.data() + r * total + offset);
    offset += w;
  }
  bool grad = false;
  if (tape) {
    for (const auto& p : parts) grad = grad || p.requires_grad();
  }
  Tensor result = Tensor::result({rows, total}, std::move(out), grad);
  if (grad) {
    tape->record([parts, result, rows, total]() mutable {
      const auto g = result.grad_buffer();
      std::size_t offset = 0;
      for (auto& p : parts) {
        const std::size_t w = p.cols();
        if (p.requires_grad()) {
          auto gp = p.grad_buffer();
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < w; ++c) gp[r * w + c] += g[r * total + offset + c];
        }
        offset += w;
      }
    });
  }
  return result;
}

Tensor stack_rows(const std::vector<Tensor>& parts, Tape* tape) {
  if (parts.empty()) throw DimensionError("stack_rows: no parts");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_matrix(p, "stack_rows");
    if (p.cols() != cols) {
      throw DimensionError("stack_rows: column mismatch " + to_string(parts.front().shape()) +
                           " vs " + to_string(p.shape()));
    }
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  bool grad = false;
  for (const auto& p : parts) {
    const auto pv = p.values();
    out.insert(out.end(), pv.begin(), pv.end());
    grad = grad || p.requires_grad();
  }
  grad = grad && tape;
  Tensor result = Tensor::result({rows, cols}, std::move(out), grad);
  if (grad) {
    tape->record([parts, result]() mutable {
      const auto g = result.grad_buffer();
      std::size_t offset = 0;
      for (auto& p : parts) {
        if (p.requires_grad()) {
          auto gp = p.grad_buffer();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offset + i];
        }
        offset += p.size();
      }
    });
  }
  return result;
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t count, Tape* tape) {
  require_matrix(a, "slice_rows");
  const std::size_t cols = a.cols();
  if (count == 0 || begin + count > a.rows()) {
    throw DimensionError("slice_rows: rows [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + to_string(a.shape()));
  }
  const auto av = a.values();
  std::vector<double> out(av.begin() + begin * cols, av.begin() + (begin + count) * cols);
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result({count, cols}, std::move(out), grad);
  if (grad) {
    tape->record([a, result, begin, cols]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[begin * cols + i] += g[i];
    });
  }
  return result;
}

Tensor gather_rows(const Tensor& a, std::span<const std::int32_t> indices, Tape* tape) {
  require_matrix(a, "gather_rows");
  if (indices.empty()) throw DimensionError("gather_rows: no indices");
  const std::size_t rows = a.rows(), cols = a.cols();
  const auto av = a.values();
  std::vector<double> out(indices.size() * cols);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto idx = indices[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= rows) {
      throw LookupError("index " + std::to_string(idx) + " out of range for " +
                        std::to_string(rows) + " rows");
    }
    std::copy_n(av.data() + static_cast<std::size_t>(idx) * cols, cols, out.data() + i * cols);
  }
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result({indices.size(), cols}, std::move(out), grad);
  if (grad) {
    std::vector<std::int32_t> idx(indices.begin(), indices.end());
    tape->record([a, result, idx = std::move(idx), cols]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t c = 0; c < cols; ++c)
          ga[static_cast<std::size_t>(idx[i]) * cols + c] += g[i * cols + c];
    });
  }
  return result;
}

Tensor select_rows(std::span<const std::uint8_t> keep, const Tensor& a, const Tensor& b,
                   Tape* tape) {
  require_same_shape(a, b, "select_rows");
  require_matrix(a, "select_rows");
  const std::size_t rows = a.rows(), cols = a.cols();
  if (keep.size() != rows) {
    throw DimensionError("select_rows: " + std::to_string(keep.size()) + " flags for " +
                         std::to_string(rows) + " rows");
  }
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& src = keep[r] ? av : bv;
    std::copy_n(src.data() + r * cols, cols, out.data() + r * cols);
  }
  const bool grad = tracks(tape, {&a, &b});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    std::vector<std::uint8_t> flags(keep.begin(), keep.end());
    tape->record([a, b, result, flags = std::move(flags), cols]() mutable {
      const auto g = result.grad_buffer();
      for (std::size_t r = 0; r < flags.size(); ++r) {
        const Tensor& target = flags[r] ? a : b;
        if (!target.requires_grad()) continue;
        auto gt = target.grad_buffer();
        for (std::size_t c = 0; c < cols; ++c) gt[r * cols + c] += g[r * cols + c];
      }
    });
  }
  return result;
}

Tensor mask_rows(const Tensor& a, std::span<const std::uint8_t> keep, Tape* tape) {
  require_matrix(a, "mask_rows");
  const std::size_t rows = a.rows(), cols = a.cols();
  if (keep.size() != rows) {
    throw DimensionError("mask_rows: " + std::to_string(keep.size()) + " flags for " +
                         std::to_string(rows) + " rows");
  }
  const auto av = a.values();
  std::vector<double> out(av.size(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (keep[r]) std::copy_n(av.data() + r * cols, cols, out.data() + r * cols);
  }
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result(a.shape(), std::move(out), grad);
  if (grad) {
    std::vector<std::uint8_t> flags(keep.begin(), keep.end());
    tape->record([a, result, flags = std::move(flags), cols]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t r = 0; r < flags.size(); ++r) {
        if (!flags[r]) continue;
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r * cols + c];
      }
    });
  }
  return result;
}

Tensor reshape(const Tensor& a, Shape shape, Tape* tape) {
  if (element_count(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + to_string(a.shape()) + " as " +
                         to_string(shape));
  }
  const auto av = a.values();
  const bool grad = tracks(tape, {&a});
  Tensor result =
      Tensor::result(std::move(shape), std::vector<double>(av.begin(), av.end()), grad);
  if (grad) {
    tape->record([a, result]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return result;
}

Tensor transpose(const Tensor& a, Tape* tape) {
  require_matrix(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result({n, m}, std::move(out), grad);
  if (grad) {
    tape->record([a, result, m, n]() mutable {
      const auto g = result.grad_buffer();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
    });
  }
  return result;
}

Tensor pool_steps(const Tensor& weights, const Tensor& sequence, Tape* tape) {
  require_matrix(weights, "pool_steps");
  require_matrix(sequence, "pool_steps");
  const std::size_t batch = weights.rows(), steps = weights.cols(), dim = sequence.cols();
  if (sequence.rows() != batch * steps) {
    throw DimensionError("pool_steps: weights " + to_string(weights.shape()) +
                         " do not match sequence " + to_string(sequence.shape()));
  }
  const auto wv = weights.values();
  const auto sv = sequence.values();
  std::vector<double> out(batch * dim, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < steps; ++t) {
      const double w = wv[b * steps + t];
      const double* row = sv.data() + (t * batch + b) * dim;
      for (std::size_t d = 0; d < dim; ++d) out[b * dim + d] += w * row[d];
    }
  }
  const bool grad = tracks(tape, {&weights, &sequence});
  Tensor result = Tensor::result({batch, dim}, std::move(out), grad);
  if (grad) {
    tape->record([weights, sequence, result, batch, steps, dim]() mutable {
      const auto g = result.grad_buffer();
      const auto wv = weights.values();
      const auto sv = sequence.values();
      if (weights.requires_grad()) {
        auto gw = weights.grad_buffer();
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t t = 0; t < steps; ++t) {
            const double* row = sv.data() + (t * batch + b) * dim;
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += g[b * dim + d] * row[d];
            gw[b * steps + t] += s;
          }
      }
      if (sequence.requires_grad()) {
        auto gs = sequence.grad_buffer();
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t t = 0; t < steps; ++t) {
            const double w = wv[b * steps + t];
            double* grow = gs.data() + (t * batch + b) * dim;
            for (std::size_t d = 0; d < dim; ++d) grow[d] += w * g[b * dim + d];
          }
      }
    });
  }
  return result;
}

Tensor sum(const Tensor& a, Tape* tape) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result({1}, {total}, grad);
  if (grad) {
    tape->record([a, result]() mutable {
      const double g = result.grad_buffer()[0];
      for (double& v : a.grad_buffer()) v += g;
    });
  }
  return result;
}

Tensor sum_squares(const Tensor& a, Tape* tape) {
  double total = 0.0;
  for (double v : a.values()) total += v * v;
  const bool grad = tracks(tape, {&a});
  Tensor result = Tensor::result({1}, {total}, grad);
  if (grad) {
    tape->record([a, result]() mutable {
      const double g = result.grad_buffer()[0];
      const auto av = a.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * g * av[i];
    });
  }
  return result;
}

}  // namespace pan::ops
