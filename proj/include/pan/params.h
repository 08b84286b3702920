#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pan/dataset.h"
#include "pan/tensor.h"

namespace pan {

struct ModelDims {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 300;
  std::size_t hidden = 50;  // per direction
  std::size_t labels = kNumEmotions;

  std::size_t gru1_input() const { return embed_dim; }
  std::size_t gru2_input() const { return 2 * hidden; }
  std::size_t attention1_width() const { return 2 * hidden + embed_dim; }
  std::size_t attention2_width() const { return 4 * hidden + embed_dim; }
  std::size_t pooled_width() const { return attention1_width() + attention2_width(); }

  bool operator==(const ModelDims&) const = default;
};

// One GRU direction. Input matrices are d_in x hidden and hidden matrices
// hidden x hidden, applied to row vectors (x * W).
struct GruDirectionParams {
  Tensor W_ir, W_iz, W_in;
  Tensor W_hr, W_hz, W_hn;
  Tensor b_ir, b_iz, b_in;
  Tensor b_hr, b_hz, b_hn;

  static GruDirectionParams zeros(std::size_t input, std::size_t hidden);
  std::size_t input_size() const { return W_ir.rows(); }
  std::size_t hidden_size() const { return W_hr.rows(); }

  template <typename F>
  void for_each(const std::string& prefix, F&& f) {
    f(prefix + ".W_ir", W_ir);
    f(prefix + ".W_iz", W_iz);
    f(prefix + ".W_in", W_in);
    f(prefix + ".W_hr", W_hr);
    f(prefix + ".W_hz", W_hz);
    f(prefix + ".W_hn", W_hn);
    f(prefix + ".b_ir", b_ir);
    f(prefix + ".b_iz", b_iz);
    f(prefix + ".b_in", b_in);
    f(prefix + ".b_hr", b_hr);
    f(prefix + ".b_hz", b_hz);
    f(prefix + ".b_hn", b_hn);
  }
};

// Scores e_i = u_i . w_a + b; w_a is a d_u x 1 column, b a single value.
struct AttentionParams {
  Tensor w_a;
  Tensor b;

  static AttentionParams zeros(std::size_t width);
};

struct ModelParams {
  Tensor embedding;  // frozen, |vocab| x embed_dim
  GruDirectionParams gru1_fwd, gru1_bwd, gru2_fwd, gru2_bwd;
  AttentionParams attn1, attn2;
  Tensor W_d;  // pooled_width x labels
  Tensor b_d;

  // Zero-initialized trainable parameters around the given embedding.
  static ModelParams zeros(Tensor embedding, std::size_t hidden,
                           std::size_t labels = kNumEmotions);
  // Rebuilds parameters from canonical named records (see named()). Every
  // name must appear exactly once with a consistent shape.
  static ModelParams from_named(const std::vector<NamedTensor>& records);

  ModelDims dims() const;

  // Every tensor under its canonical name, embedding first.
  std::vector<NamedTensor> named() const;
  std::vector<NamedTensor> trainable() const;
  // Matrices subject to the L2 penalty: GRU weights, attention vectors and
  // the dense matrix. Biases and the embedding are excluded.
  std::vector<NamedTensor> weight_matrices() const;

  // Deep copy; the copy shares no storage with *this.
  ModelParams clone() const;

  template <typename F>
  void for_each(F&& f) {
    f(std::string("embedding"), embedding);
    gru1_fwd.for_each("gru1.fwd", f);
    gru1_bwd.for_each("gru1.bwd", f);
    gru2_fwd.for_each("gru2.fwd", f);
    gru2_bwd.for_each("gru2.bwd", f);
    f(std::string("attn1.w_a"), attn1.w_a);
    f(std::string("attn1.b"), attn1.b);
    f(std::string("attn2.w_a"), attn2.w_a);
    f(std::string("attn2.b"), attn2.b);
    f(std::string("dense.W_d"), W_d);
    f(std::string("dense.b_d"), b_d);
  }
};

// Uniform Glorot weights (+-sqrt(6 / (fan_in + fan_out))) and zero biases,
// drawn from the seed's "init" stream in canonical parameter order.
ModelParams init_params(Tensor embedding, std::size_t hidden, std::uint64_t seed,
                        std::size_t labels = kNumEmotions);

}  // namespace pan
