#include "pan/regularization.h"

#include <random>
#include <string>

#include "pan/errors.h"
#include "pan/ops.h"
#include "pan/random.h"

namespace pan {

Tensor apply_dropout(const Tensor& x, double p, Mode mode, std::uint64_t seed,
                     DropoutVariant variant, std::size_t examples, Tape* tape) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  if (mode == Mode::eval || p == 0.0) return x;

  Rng rng(seed);
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  std::vector<double> mask(x.size());
  if (variant == DropoutVariant::standard) {
    for (double& m : mask) m = keep(rng) ? scale : 0.0;
  } else {
    const std::size_t rows = x.rows(), cols = x.cols();
    if (examples == 0 || rows % examples != 0) {
      throw DimensionError("spatial dropout: " + std::to_string(rows) +
                           " rows do not split into " + std::to_string(examples) + " examples");
    }
    std::vector<double> channel(examples * cols);
    for (double& m : channel) m = keep(rng) ? scale : 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) mask[r * cols + c] = channel[(r % examples) * cols + c];
  }
  return ops::mul(x, Tensor::from(x.shape(), std::move(mask)), tape);
}

ModelParams perturb_hidden_weights(const ModelParams& params, double sigma, std::uint64_t seed,
                                   Tape* tape) {
  if (sigma < 0.0) throw ConfigError("weight noise standard deviation must be non-negative");
  ModelParams noisy = params;
  if (sigma == 0.0) return noisy;
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  auto perturb = [&](Tensor& w) {
    std::vector<double> noise(w.size());
    for (double& v : noise) v = dist(rng);
    w = ops::add(w, Tensor::from(w.shape(), std::move(noise)), tape);
  };
  for (auto* dir : {&noisy.gru1_fwd, &noisy.gru1_bwd, &noisy.gru2_fwd, &noisy.gru2_bwd}) {
    perturb(dir->W_hr);
    perturb(dir->W_hz);
    perturb(dir->W_hn);
  }
  return noisy;
}

}  // namespace pan
