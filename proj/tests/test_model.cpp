#include <doctest.h>

#include <cmath>
#include <random>

#include "pan/errors.h"
#include "pan/model.h"
#include "pan/ops.h"
#include "pan/random.h"

using namespace pan;

namespace {

using Vec = std::vector<double>;

void fill_uniform(Tensor& t, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.mutable_values()) v = u(rng);
}

GruDirectionParams random_gru(std::mt19937_64& rng, std::size_t in, std::size_t hidden) {
  auto p = GruDirectionParams::zeros(in, hidden);
  p.for_each("g", [&](const std::string&, Tensor& t) { fill_uniform(t, rng, 0.8); });
  return p;
}

// Straight scalar transcription of the GRU update for one row.
Vec oracle_gru(const Vec& x, const Vec& h, const GruDirectionParams& p) {
  const std::size_t H = p.hidden_size(), D = p.input_size();
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  Vec out(H);
  for (std::size_t j = 0; j < H; ++j) {
    double xr = p.b_ir.at(j), xz = p.b_iz.at(j), xn = p.b_in.at(j);
    for (std::size_t i = 0; i < D; ++i) {
      xr += x[i] * p.W_ir.at(i, j);
      xz += x[i] * p.W_iz.at(i, j);
      xn += x[i] * p.W_in.at(i, j);
    }
    double hr = p.b_hr.at(j), hz = p.b_hz.at(j), hn = p.b_hn.at(j);
    for (std::size_t i = 0; i < H; ++i) {
      hr += h[i] * p.W_hr.at(i, j);
      hz += h[i] * p.W_hz.at(i, j);
      hn += h[i] * p.W_hn.at(i, j);
    }
    const double r = sig(xr + hr);
    const double z = sig(xz + hz);
    const double n = std::tanh(xn + r * hn);
    out[j] = (1.0 - z) * n + z * h[j];
  }
  return out;
}

Example make_example(std::vector<std::int32_t> tokens, std::size_t max_len) {
  Example ex;
  ex.id = "x";
  ex.indices.assign(max_len, 0);
  ex.mask.assign(max_len, 0);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    ex.indices[t] = tokens[t];
    ex.mask[t] = 1;
  }
  return ex;
}

ModelParams small_model(std::uint64_t seed, std::size_t labels = kNumEmotions) {
  auto rng = make_rng(seed, "test_model");
  Tensor emb = Tensor::zeros({12, 5});
  fill_uniform(emb, rng, 1.0);
  for (std::size_t c = 0; c < 5; ++c) emb.mutable_values()[c] = 0.0;
  auto p = init_params(emb, 3, seed, labels);
  fill_uniform(p.attn1.w_a, rng, 1.0);
  fill_uniform(p.attn2.w_a, rng, 1.0);
  return p;
}

}  // namespace

TEST_CASE("GRU with zero weights halves the previous state") {
  const auto p = GruDirectionParams::zeros(2, 3);
  const auto h = gru_cell(Tensor::from({1, 2}, {0.7, -0.2}), Tensor::from({1, 3}, {0.8, -0.8, 0.0}), p);
  CHECK(h.at(0) == 0.4);
  CHECK(h.at(1) == -0.4);
  CHECK(h.at(2) == 0.0);
}

TEST_CASE("GRU with a saturated update gate keeps its state") {
  auto p = GruDirectionParams::zeros(1, 2);
  for (double& v : p.b_iz.mutable_values()) v = 60.0;
  for (double& v : p.W_in.mutable_values()) v = 3.0;
  const auto h = gru_cell(Tensor::from({1, 1}, {1.0}), Tensor::from({1, 2}, {0.3, -0.6}), p);
  CHECK(std::abs(h.at(0) - 0.3) < 1e-15);
  CHECK(std::abs(h.at(1) + 0.6) < 1e-15);
}

TEST_CASE("GRU cell matches a scalar transcription") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_gru(rng, 4, 3);
    Vec x(2 * 4), h(2 * 3);
    for (auto& v : x) v = u(rng);
    for (auto& v : h) v = u(rng);
    const auto out = gru_cell(Tensor::from({2, 4}, x), Tensor::from({2, 3}, h), p);
    for (std::size_t b = 0; b < 2; ++b) {
      const auto expected = oracle_gru(Vec(x.begin() + b * 4, x.begin() + b * 4 + 4),
                                       Vec(h.begin() + b * 3, h.begin() + b * 3 + 3), p);
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(out.at(b, j) - expected[j]) < 1e-12);
    }
  }
}

TEST_CASE("bidirectional layer over one step") {
  std::mt19937_64 rng(7);
  const auto fwd = random_gru(rng, 2, 3);
  const auto bwd = random_gru(rng, 2, 3);
  const Vec x{0.5, -1.0};
  const std::vector<std::uint8_t> mask{1};
  const auto out = bigru_layer(Tensor::from({1, 2}, x), 1, mask, fwd, bwd);
  const auto f = oracle_gru(x, Vec(3, 0.0), fwd);
  const auto b = oracle_gru(x, Vec(3, 0.0), bwd);
  CHECK(out.shape() == Shape{1, 6});
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(out.at(0, j) - f[j]) < 1e-12);
    CHECK(std::abs(out.at(0, 3 + j) - b[j]) < 1e-12);
  }
}

TEST_CASE("bidirectional layer matches a scan oracle on a masked batch") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t B = 3, T = 5, D = 2, H = 3;
  const auto fwd = random_gru(rng, D, H);
  const auto bwd = random_gru(rng, D, H);
  const std::size_t lengths[B] = {5, 2, 4};
  std::vector<std::uint8_t> mask(B * T, 0);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < lengths[b]; ++t) mask[b * T + t] = 1;
  Vec x(T * B * D);
  for (auto& v : x) v = u(rng);
  const auto out = bigru_layer(Tensor::from({T * B, D}, x), B, mask, fwd, bwd);

  for (std::size_t b = 0; b < B; ++b) {
    auto input = [&](std::size_t t) {
      return Vec(x.begin() + (t * B + b) * D, x.begin() + (t * B + b + 1) * D);
    };
    std::vector<Vec> f(T, Vec(H, 0.0)), r(T, Vec(H, 0.0));
    Vec h(H, 0.0);
    for (std::size_t t = 0; t < lengths[b]; ++t) f[t] = h = oracle_gru(input(t), h, fwd);
    h.assign(H, 0.0);
    for (std::size_t k = lengths[b]; k-- > 0;) r[k] = h = oracle_gru(input(k), h, bwd);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t j = 0; j < H; ++j) {
        CHECK(std::abs(out.at(t * B + b, j) - f[t][j]) < 1e-12);
        CHECK(std::abs(out.at(t * B + b, H + j) - r[t][j]) < 1e-12);
      }
    }
  }
}

TEST_CASE("attention with a zero scorer averages the valid steps") {
  // T=3, B=2, d=1; example 1 has two valid steps
  const auto units = Tensor::from({6, 1}, {1, 4, 2, 8, 3, 100});
  const std::vector<std::uint8_t> mask{1, 1, 1, 1, 1, 0};
  const auto p = AttentionParams::zeros(1);
  const auto r = attention_pool(units, 2, mask, p);
  CHECK(r.pooled.at(0) == doctest::Approx(2.0));
  CHECK(r.pooled.at(1) == doctest::Approx(6.0));
  CHECK(r.weights.at(1, 2) == 0.0);
}

TEST_CASE("attention concentrates on the highest-scoring step") {
  const auto units = Tensor::from({3, 2}, {1, 0, 0, 1, 5, 5});
  const std::vector<std::uint8_t> mask{1, 1, 1};
  AttentionParams p = AttentionParams::zeros(2);
  p.w_a.mutable_values()[0] = 1.0;
  p.w_a.mutable_values()[1] = -1.0;
  const auto r = attention_pool(units, 1, mask, p);
  const double e1 = std::exp(1.0), e2 = std::exp(-1.0), e3 = 1.0, z = e1 + e2 + e3;
  CHECK(std::abs(r.weights.at(0) - e1 / z) < 1e-15);
  CHECK(std::abs(r.weights.at(1) - e2 / z) < 1e-15);
  CHECK(std::abs(r.weights.at(2) - e3 / z) < 1e-15);
  CHECK(std::abs(r.pooled.at(0) - (e1 + 5 * e3) / z) < 1e-14);
}

TEST_CASE("embedding lookup equals a one-hot product") {
  std::mt19937_64 rng(4);
  Tensor emb = Tensor::zeros({6, 3});
  fill_uniform(emb, rng, 1.0);
  const std::vector<std::int32_t> idx{5, 0, 2, 2};
  const auto x = embed(idx, emb);
  Vec onehot(4 * 6, 0.0);
  for (std::size_t i = 0; i < idx.size(); ++i) onehot[i * 6 + idx[i]] = 1.0;
  const auto y = ops::matmul(Tensor::from({4, 6}, onehot), emb);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x.at(i) == y.at(i));
}

TEST_CASE("zero dense layer predicts one half everywhere") {
  auto p = small_model(1);
  for (double& v : p.W_d.mutable_values()) v = 0.0;
  const std::vector<Example> exs{make_example({2, 3, 4}, 4), make_example({5}, 4)};
  const auto out = forward(p, make_batch(exs), Mode::eval);
  for (double v : out.probabilities.values()) CHECK(v == 0.5);
}

TEST_CASE("forward output shapes") {
  const std::vector<Example> exs{make_example({2, 3, 4}, 4), make_example({5}, 4)};
  const auto eleven = forward(small_model(2), make_batch(exs), Mode::eval);
  CHECK(eleven.probabilities.shape() == Shape{2, 11});
  CHECK(eleven.attention1.shape() == Shape{2, 3});
  const auto seven = forward(small_model(2, 7), make_batch(exs), Mode::eval);
  CHECK(seven.probabilities.shape() == Shape{2, 7});
  for (double v : seven.probabilities.values()) CHECK((v > 0.0 && v < 1.0));
}

TEST_CASE("padding does not change predictions") {
  const auto p = small_model(3);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int32_t> toks(1 + rng() % 5);
    for (auto& t : toks) t = 1 + static_cast<std::int32_t>(rng() % 11);
    const std::vector<Example> one{make_example(toks, toks.size() + 3)};
    const auto a = forward(p, make_batch(one), Mode::eval).probabilities;
    const auto b = forward(p, make_batch(one, toks.size() + 3), Mode::eval).probabilities;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.at(i) == b.at(i));
  }
}

TEST_CASE("a batch predicts each example as if alone") {
  const auto p = small_model(4);
  const std::vector<Example> exs{make_example({2, 3, 4, 5}, 6), make_example({7}, 6),
                                 make_example({8, 9}, 6)};
  const auto together = forward(p, make_batch(exs), Mode::eval).probabilities;
  for (std::size_t b = 0; b < exs.size(); ++b) {
    const std::vector<Example> one{exs[b]};
    const auto alone = forward(p, make_batch(one), Mode::eval).probabilities;
    for (std::size_t c = 0; c < kNumEmotions; ++c)
      CHECK(std::abs(together.at(b, c) - alone.at(0, c)) < 1e-12);
  }
}

TEST_CASE("train mode with regularizers off equals eval mode") {
  const auto p = small_model(5);
  const std::vector<Example> exs{make_example({2, 3, 4}, 4), make_example({5, 6}, 4)};
  const auto batch = make_batch(exs);
  const auto a = forward(p, batch, Mode::eval).probabilities;
  const auto b = forward(p, batch, Mode::train, Regularization{0.0, 0.0, 0.0, 99}).probabilities;
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.at(i) == b.at(i));
}

TEST_CASE("training-mode forward is reproducible from its seed") {
  const auto p = small_model(6);
  const std::vector<Example> exs{make_example({2, 3, 4}, 4), make_example({5, 6}, 4)};
  const auto batch = make_batch(exs);
  const Regularization reg{0.4, 0.2, 0.1, 1234};
  const auto a = forward(p, batch, Mode::train, reg).probabilities;
  const auto b = forward(p, batch, Mode::train, reg).probabilities;
  const auto c = forward(p, batch, Mode::train, Regularization{0.4, 0.2, 0.1, 1235}).probabilities;
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("batch construction errors") {
  const std::vector<Example> none;
  CHECK_THROWS_AS(make_batch(none), ContractError);
  Example empty;
  empty.id = "e";
  CHECK_THROWS_AS(make_batch(std::vector<Example>{empty}), EmptySequenceError);
  CHECK_THROWS_AS(make_batch(std::vector<Example>{make_example({2, 3}, 3)}, 1), DimensionError);
}

TEST_CASE("parameter naming and shapes") {
  const auto p = small_model(7);
  const auto d = p.dims();
  CHECK(d.vocab_size == 12);
  CHECK(d.embed_dim == 5);
  CHECK(d.hidden == 3);
  CHECK(d.attention1_width() == 11);
  CHECK(d.attention2_width() == 17);
  CHECK(p.W_d.shape() == Shape{28, 11});
  const auto named = p.named();
  CHECK(named.front().name == "embedding");
  CHECK(named.back().name == "dense.b_d");
  CHECK(p.trainable().size() == named.size() - 1);
  CHECK(p.weight_matrices().size() == 4 * 6 + 2 + 1);
  const auto rebuilt = ModelParams::from_named(p.named());
  CHECK(std::equal(rebuilt.W_d.values().begin(), rebuilt.W_d.values().end(), p.W_d.values().begin()));
  auto missing = p.named();
  missing.pop_back();
  CHECK_THROWS(ModelParams::from_named(missing));
}

TEST_CASE("glorot initialization stays within its bound") {
  const auto p = init_params(Tensor::zeros({4, 6}), 5, 9);
  const double bound = std::sqrt(6.0 / (6 + 5));
  for (double v : p.gru1_fwd.W_ir.values()) CHECK(std::abs(v) <= bound);
  for (double v : p.gru1_fwd.b_ir.values()) CHECK(v == 0.0);
  const auto q = init_params(Tensor::zeros({4, 6}), 5, 9);
  CHECK(std::equal(p.W_d.values().begin(), p.W_d.values().end(), q.W_d.values().begin()));
}
