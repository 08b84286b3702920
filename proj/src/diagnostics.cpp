#include "pan/diagnostics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "pan/checkpoint.h"
#include "pan/embeddings.h"
#include "pan/errors.h"
#include "pan/metrics.h"
#include "pan/ops.h"
#include "pan/random.h"
#include "pan/training.h"

namespace pan {

namespace {

constexpr std::size_t kVocab = 20;
constexpr std::size_t kEmbed = 8;
constexpr std::size_t kHidden = 4;
constexpr std::size_t kSteps = 5;

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

ModelParams random_small_params(std::uint64_t seed) {
  ModelParams p = init_params(random_embeddings(kVocab, kEmbed, seed), kHidden, seed);
  auto rng = make_rng(seed, "diagnostic_biases");
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  p.for_each([&](const std::string&, Tensor& t) {
    if (!t.trainable() || t.rank() != 1) return;
    for (double& v : t.mutable_values()) v = dist(rng);
  });
  return p;
}

Example random_example(Rng& rng, std::size_t length, std::size_t max_len) {
  std::uniform_int_distribution<std::int32_t> token(2, static_cast<std::int32_t>(kVocab) - 1);
  std::bernoulli_distribution label(0.3);
  Example ex;
  ex.id = "synthetic";
  ex.indices.assign(max_len, Vocabulary::kPad);
  ex.mask.assign(max_len, 0);
  for (std::size_t t = 0; t < length; ++t) {
    ex.indices[t] = token(rng);
    ex.mask[t] = 1;
  }
  for (auto& l : ex.labels) l = label(rng) ? 1 : 0;
  return ex;
}

CheckOutcome check_softmax(std::uint64_t seed) {
  auto rng = make_rng(seed, "selftest_softmax");
  std::uniform_real_distribution<double> score(-20.0, 20.0);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> s(n);
    std::vector<std::uint8_t> mask(n);
    for (auto& v : s) v = score(rng);
    for (auto& m : mask) m = rng() & 1;
    mask[rng() % n] = 1;
    const auto a = ops::masked_softmax(Tensor::from({1, n}, s), mask);
    std::vector<double> shifted = s;
    for (auto& v : shifted) v += 7.25;
    const auto b = ops::masked_softmax(Tensor::from({1, n}, shifted), mask);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.at(i) < 0.0 || (!mask[i] && a.at(i) != 0.0)) {
        return {"masked softmax", false, "negative or leaking weight"};
      }
      total += a.at(i);
      worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {"masked softmax", worst <= 1e-12, "max deviation " + sci(worst)};
}

CheckOutcome check_convex_hull(std::uint64_t seed) {
  auto rng = make_rng(seed, "selftest_hull");
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t steps = 1 + rng() % 8, width = 1 + rng() % 6;
    std::vector<double> u(steps * width), w(width);
    for (auto& v : u) v = 3.0 * unit(rng);
    for (auto& v : w) v = 2.0 * unit(rng);
    std::vector<std::uint8_t> mask(steps);
    for (auto& m : mask) m = rng() & 1;
    mask[rng() % steps] = 1;
    AttentionParams p{Tensor::from({width, 1}, w), Tensor::scalar(unit(rng))};
    const auto pooled = attention_pool(Tensor::from({steps, width}, u), 1, mask, p).pooled;
    for (std::size_t d = 0; d < width; ++d) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t t = 0; t < steps; ++t) {
        if (!mask[t]) continue;
        lo = std::min(lo, u[t * width + d]);
        hi = std::max(hi, u[t * width + d]);
      }
      worst = std::max({worst, lo - pooled.at(d), pooled.at(d) - hi});
    }
  }
  return {"attention convex hull", worst <= 1e-12, "max excursion " + sci(std::max(worst, 0.0))};
}

CheckOutcome check_padding(std::uint64_t seed) {
  const ModelParams params = random_small_params(seed);
  auto rng = make_rng(seed, "selftest_padding");
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t len = 1 + rng() % 6;
    const Example ex = random_example(rng, len, len + 3);
    const std::vector<Example> one{ex};
    const auto a = forward(params, make_batch(one, len), Mode::eval).probabilities;
    const auto b = forward(params, make_batch(one, len + 3), Mode::eval).probabilities;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.at(i) - b.at(i)));
  }
  return {"padding invariance", worst < 1e-12, "max change " + sci(worst)};
}

CheckOutcome check_gru_bounds(std::uint64_t seed) {
  auto rng = make_rng(seed, "selftest_gru");
  std::uniform_real_distribution<double> big(-5.0, 5.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto p = GruDirectionParams::zeros(3, 4);
    p.for_each("g", [&](const std::string&, Tensor& t) {
      for (double& v : t.mutable_values()) v = big(rng);
    });
    Tensor h = Tensor::zeros({1, 4});
    for (int t = 0; t < 25; ++t) {
      std::vector<double> x(3);
      for (auto& v : x) v = big(rng);
      h = gru_cell(Tensor::from({1, 3}, x), h, p);
      for (double v : h.values()) worst = std::max(worst, std::abs(v));
    }
  }
  return {"GRU state bound", worst <= 1.0, "max |h| " + sci(worst)};
}

CheckOutcome check_eval_determinism(std::uint64_t seed) {
  const ModelParams params = random_small_params(seed);
  auto rng = make_rng(seed, "selftest_determinism");
  std::vector<Example> examples{random_example(rng, 5, 5), random_example(rng, 2, 5)};
  const Batch batch = make_batch(examples);
  const auto a = forward(params, batch, Mode::eval).probabilities;
  const auto b = forward(params, batch, Mode::eval).probabilities;
  const bool same = std::equal(a.values().begin(), a.values().end(), b.values().begin());
  return {"eval determinism", same, same ? "bit-identical" : "outputs differ"};
}

CheckOutcome check_schedule() {
  TrainingConfig cfg;
  ScheduleState state;
  double lr = cfg.lr_init;
  std::vector<double> seen;
  double loss = 1.0;
  lr = lr_schedule_update(state, loss, lr, cfg);
  for (int i = 0; i < 12; ++i) {
    loss += 0.1;
    const double next = lr_schedule_update(state, loss, lr, cfg);
    if (next != lr) seen.push_back(next);
    lr = next;
  }
  const std::vector<double> expected{0.0005, 0.00025, 0.000125, 0.0001};
  return {"learning-rate schedule", seen == expected,
          "final lr " + sci(lr) + " after " + std::to_string(seen.size()) + " reductions"};
}

CheckOutcome check_adam_fixed_point(std::uint64_t seed) {
  ModelParams params = random_small_params(seed);
  const ModelParams reference = params.clone();
  Adam adam(params.trainable());
  for (auto p : params.trainable()) p.tensor.zero_grad();
  for (int i = 0; i < 3; ++i) adam.step(0.001);
  const auto a = reference.named();
  const auto b = params.named();
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    same = same && std::equal(a[i].tensor.values().begin(), a[i].tensor.values().end(),
                              b[i].tensor.values().begin());
  return {"Adam zero-gradient fixed point", same, same ? "unchanged" : "parameters moved"};
}

CheckOutcome check_metrics(std::uint64_t seed) {
  auto rng = make_rng(seed, "selftest_metrics");
  std::bernoulli_distribution bit(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 20;
    BinaryMatrix pred(rows, kNumEmotions), gold(rows, kNumEmotions);
    for (auto& c : pred.cells) c = bit(rng);
    for (auto& c : gold.cells) c = bit(rng);
    const auto base = evaluate_predictions(pred, gold);
    for (double v : {base.jaccard, base.micro_f1, base.macro_f1}) {
      if (v < 0.0 || v > 1.0) return {"metric invariances", false, "metric outside [0, 1]"};
    }
    if ((base.jaccard == 1.0) != (pred == gold)) {
      return {"metric invariances", false, "jaccard == 1 does not coincide with pred == gold"};
    }
    std::vector<std::size_t> perm(kNumEmotions);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    BinaryMatrix pp(rows, kNumEmotions), pg(rows, kNumEmotions);
    BinaryMatrix dp(2 * rows, kNumEmotions), dg(2 * rows, kNumEmotions);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < kNumEmotions; ++c) {
        pp.at(r, perm[c]) = pred.at(r, c);
        pg.at(r, perm[c]) = gold.at(r, c);
        dp.at(r, c) = dp.at(r + rows, c) = pred.at(r, c);
        dg.at(r, c) = dg.at(r + rows, c) = gold.at(r, c);
      }
    const auto permuted = evaluate_predictions(pp, pg);
    const auto doubled = evaluate_predictions(dp, dg);
    const double drift = std::max({std::abs(permuted.micro_f1 - base.micro_f1),
                                   std::abs(permuted.macro_f1 - base.macro_f1),
                                   std::abs(doubled.jaccard - base.jaccard),
                                   std::abs(doubled.micro_f1 - base.micro_f1),
                                   std::abs(doubled.macro_f1 - base.macro_f1)});
    if (drift > 1e-12) return {"metric invariances", false, "drift " + sci(drift)};
  }
  return {"metric invariances", true, "bounds, permutation and duplication hold"};
}

CheckOutcome check_checkpoint(std::uint64_t seed) {
  std::vector<std::string> tokens{"<pad>", "<unk>"};
  for (std::size_t i = 2; i < kVocab; ++i) tokens.push_back("w" + std::to_string(i));
  Checkpoint ckpt{random_small_params(seed), Vocabulary::from_tokens(tokens), RunConfig{}, 0.25};
  const auto first = encode_checkpoint(ckpt);
  const auto second = encode_checkpoint(decode_checkpoint(first));
  return {"checkpoint round trip", first == second,
          std::to_string(first.size()) + " bytes" + (first == second ? ", identical" : ", differ")};
}

}  // namespace

DownsizedProblem make_downsized_problem(std::uint64_t seed) {
  DownsizedProblem problem;
  problem.params = random_small_params(seed);
  auto rng = make_rng(seed, "diagnostic_batch");
  std::vector<Example> examples{random_example(rng, kSteps, kSteps), random_example(rng, 3, kSteps)};
  problem.batch = make_batch(examples, kSteps);
  return problem;
}

GradCheckResult gradcheck_downsized(std::uint64_t seed, double epsilon) {
  DownsizedProblem problem = make_downsized_problem(seed);
  const ModelParams& params = problem.params;
  const Batch& batch = problem.batch;
  auto loss = [&](Tape* tape) {
    const auto out = forward(params, batch, Mode::train, Regularization{}, tape);
    return ops::add(weighted_bce(out.probabilities, batch.labels, problem.pos_weight, tape),
                    l2_penalty(params, problem.l2, tape), tape);
  };
  return grad_check(loss, params.trainable(), epsilon);
}

std::vector<CheckOutcome> run_self_checks(std::uint64_t seed) {
  std::vector<CheckOutcome> out;
  out.push_back(check_softmax(seed));
  out.push_back(check_convex_hull(seed));
  out.push_back(check_padding(seed));
  out.push_back(check_gru_bounds(seed));
  out.push_back(check_eval_determinism(seed));
  out.push_back(check_schedule());
  out.push_back(check_adam_fixed_point(seed));
  out.push_back(check_metrics(seed));
  out.push_back(check_checkpoint(seed));
  return out;
}

}  // namespace pan
