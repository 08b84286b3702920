#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "pan/errors.h"
#include "pan/grad_check.h"
#include "pan/ops.h"

using namespace pan;

namespace {

Tensor random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, bool trainable = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(r * c);
  for (auto& x : v) x = u(rng);
  return Tensor::from({r, c}, v, trainable);
}

// Reduces an op output to a scalar through fixed random weights so every
// output component contributes to the checked gradient.
Tensor weighted_total(const Tensor& out, const std::vector<double>& weights, Tape* tape) {
  Tensor w = Tensor::from(out.shape(), weights);
  return ops::sum(ops::mul(out, w, tape), tape);
}

double check_op(std::mt19937_64& rng, std::vector<NamedTensor> params,
                const std::function<Tensor(Tape*)>& op) {
  const auto probe = op(nullptr);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<double> weights(probe.size());
  for (auto& w : weights) w = u(rng);
  auto loss = [&](Tape* tape) { return weighted_total(op(tape), weights, tape); };
  return grad_check(loss, std::move(params), 1e-6).max_relative_error;
}

}  // namespace

TEST_CASE("matmul of a 2x2 and a 2x1") {
  auto a = Tensor::from({2, 2}, {1, 2, 3, 4});
  auto b = Tensor::from({2, 1}, {5, 6});
  auto c = ops::matmul(a, b);
  CHECK(c.shape() == Shape{2, 1});
  CHECK(c.at(0) == 17.0);
  CHECK(c.at(1) == 39.0);
}

TEST_CASE("matmul rejects mismatched inner dimensions") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({2, 2});
  CHECK_THROWS_AS(ops::matmul(a, b), DimensionError);
}

TEST_CASE("sigmoid of ln 3") {
  auto y = ops::sigmoid(Tensor::scalar(std::log(3.0)));
  CHECK(y.item() == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("tanh at zero and saturation") {
  auto y = ops::tanh(Tensor::from({3}, {0.0, 40.0, -40.0}));
  CHECK(y.at(0) == 0.0);
  CHECK(y.at(1) == doctest::Approx(1.0));
  CHECK(y.at(2) == doctest::Approx(-1.0));
}

TEST_CASE("softmax of [ln 2, 0]") {
  const std::vector<std::uint8_t> mask{1, 1};
  auto y = ops::masked_softmax(Tensor::from({1, 2}, {std::log(2.0), 0.0}), mask);
  CHECK(std::abs(y.at(0) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(y.at(1) - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("masked softmax zeroes masked positions and survives large scores") {
  const std::vector<std::uint8_t> mask{1, 1, 0, 1, 0, 0};
  auto y = ops::masked_softmax(Tensor::from({2, 3}, {1000.0, 1000.0, 5.0, 3.0, -2.0, 7.0}), mask);
  CHECK(y.at(0, 0) == doctest::Approx(0.5));
  CHECK(y.at(0, 1) == doctest::Approx(0.5));
  CHECK(y.at(0, 2) == 0.0);
  CHECK(y.at(1, 0) == 1.0);
  CHECK(y.at(1, 1) == 0.0);
  CHECK(y.at(1, 2) == 0.0);
}

TEST_CASE("masked softmax with an all-masked row") {
  const std::vector<std::uint8_t> mask{1, 0, 0, 0};
  CHECK_THROWS_AS(ops::masked_softmax(Tensor::from({2, 2}, {1, 2, 3, 4}), mask),
                  EmptySequenceError);
}

TEST_CASE("concat_features joins columns") {
  auto a = Tensor::from({2, 2}, {1, 2, 3, 4});
  auto b = Tensor::from({2, 1}, {5, 6});
  auto c = ops::concat_features({a, b});
  CHECK(c.shape() == Shape{2, 3});
  CHECK(std::vector<double>(c.values().begin(), c.values().end()) ==
        std::vector<double>{1, 2, 5, 3, 4, 6});
}

TEST_CASE("concat_features rejects differing row counts") {
  CHECK_THROWS_AS(ops::concat_features({Tensor::zeros({2, 2}), Tensor::zeros({3, 1})}),
                  DimensionError);
}

TEST_CASE("gather_rows out of range") {
  auto e = Tensor::zeros({3, 2});
  const std::vector<std::int32_t> idx{0, 3};
  CHECK_THROWS_AS(ops::gather_rows(e, idx), LookupError);
}

TEST_CASE("pool_steps over a time-major sequence") {
  // T=2, B=2, d=1: rows are (t0,b0) (t0,b1) (t1,b0) (t1,b1)
  auto seq = Tensor::from({4, 1}, {1, 10, 3, 30});
  auto w = Tensor::from({2, 2}, {0.25, 0.75, 1.0, 0.0});
  auto v = ops::pool_steps(w, seq);
  CHECK(v.at(0) == doctest::Approx(0.25 * 1 + 0.75 * 3));
  CHECK(v.at(1) == doctest::Approx(10.0));
}

TEST_CASE("backward through a sum of a product") {
  auto a = Tensor::from({1, 2}, {2, 3}, true);
  auto b = Tensor::from({1, 2}, {5, 7}, true);
  Tape tape;
  auto loss = ops::sum(ops::mul(a, b, &tape), &tape);
  tape.backward(loss);
  CHECK(a.grad() == std::vector<double>{5, 7});
  CHECK(b.grad() == std::vector<double>{2, 3});
}

TEST_CASE("a tensor used twice accumulates both contributions") {
  auto a = Tensor::from({1}, {3}, true);
  Tape tape;
  auto loss = ops::sum(ops::mul(a, a, &tape), &tape);
  tape.backward(loss);
  CHECK(a.grad()[0] == 6.0);
}

TEST_CASE("gradients accumulate across backward passes until zeroed") {
  auto a = Tensor::from({1}, {3}, true);
  for (int i = 0; i < 2; ++i) {
    Tape tape;
    auto loss = ops::sum(ops::affine(a, 4.0, 0.0, &tape), &tape);
    tape.backward(loss);
  }
  CHECK(a.grad()[0] == 8.0);
  a.zero_grad();
  CHECK(a.grad()[0] == 0.0);
}

TEST_CASE("a tape cannot be replayed") {
  auto a = Tensor::from({1}, {3}, true);
  Tape tape;
  auto loss = ops::sum_squares(a, &tape);
  tape.backward(loss);
  CHECK(tape.consumed());
  CHECK_THROWS_AS(tape.backward(loss), ContractError);
}

TEST_CASE("backward needs a scalar") {
  auto a = Tensor::from({2}, {1, 2}, true);
  Tape tape;
  auto y = ops::affine(a, 2.0, 0.0, &tape);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("no recording without trainable operands") {
  Tape tape;
  auto y = ops::matmul(Tensor::from({1, 1}, {2}), Tensor::from({1, 1}, {3}), &tape);
  CHECK(tape.size() == 0);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("matmul is associative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_matrix(rng, 3, 4, false);
    auto b = random_matrix(rng, 4, 2, false);
    auto c = random_matrix(rng, 2, 5, false);
    auto left = ops::matmul(ops::matmul(a, b), c);
    auto right = ops::matmul(a, ops::matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) CHECK(std::abs(left.at(i) - right.at(i)) < 1e-10);
  }
}

TEST_CASE("every op's backward agrees with finite differences") {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto a = random_matrix(rng, 3, 4);
    auto b = random_matrix(rng, 3, 4);
    auto m = random_matrix(rng, 4, 2);
    auto bias = random_matrix(rng, 1, 4);
    auto s = random_matrix(rng, 1, 1);
    auto w = random_matrix(rng, 2, 3);
    auto seq = random_matrix(rng, 6, 2);
    const std::vector<std::uint8_t> keep{1, 0, 1};
    const std::vector<std::uint8_t> mask{1, 1, 0, 1, 1, 1};
    const std::vector<std::int32_t> idx{2, 0, 2, 1};

    worst = std::max(worst, check_op(rng, {{"a", a}, {"m", m}},
                                     [&](Tape* t) { return ops::matmul(a, m, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"b", b}},
                                     [&](Tape* t) { return ops::add(a, b, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"b", b}},
                                     [&](Tape* t) { return ops::sub(a, b, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"b", b}},
                                     [&](Tape* t) { return ops::mul(a, b, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"bias", bias}},
                                     [&](Tape* t) { return ops::add_row_bias(a, bias, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"s", s}},
                                     [&](Tape* t) { return ops::add_scalar(a, s, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::affine(a, -1.5, 0.25, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}}, [&](Tape* t) { return ops::sigmoid(a, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}}, [&](Tape* t) { return ops::tanh(a, t); }));
    worst = std::max(worst, check_op(rng, {{"w", w}},
                                     [&](Tape* t) { return ops::masked_softmax(w, mask, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"w", w}}, [&](Tape* t) {
                       return ops::concat_features({a, ops::transpose(w, t)}, t);
                     }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"b", b}},
                                     [&](Tape* t) { return ops::stack_rows({a, b}, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::slice_rows(a, 1, 2, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::gather_rows(a, idx, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}, {"b", b}},
                                     [&](Tape* t) { return ops::select_rows(keep, a, b, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::mask_rows(a, keep, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::reshape(a, {2, 6}, t); }));
    worst = std::max(worst, check_op(rng, {{"w", w}, {"seq", seq}},
                                     [&](Tape* t) { return ops::pool_steps(w, seq, t); }));
    worst = std::max(worst, check_op(rng, {{"a", a}},
                                     [&](Tape* t) { return ops::sum_squares(a, t); }));
  }
  CHECK(worst < 1e-6);
}
