#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pan/metrics.h"

using namespace pan;

namespace {

BinaryMatrix from_rows(const std::vector<std::vector<int>>& rows) {
  BinaryMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.at(r, c) = static_cast<std::uint8_t>(rows[r][c]);
  return m;
}

BinaryMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int density) {
  BinaryMatrix m(rows, cols);
  for (auto& c : m.cells) c = rng() % 10 < static_cast<unsigned>(density);
  return m;
}

// Counts over explicit index sets.
double set_jaccard(const BinaryMatrix& p, const BinaryMatrix& g) {
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows; ++r) {
    std::set<std::size_t> ps, gs, un, in;
    for (std::size_t c = 0; c < p.cols; ++c) {
      if (p.at(r, c)) ps.insert(c);
      if (g.at(r, c)) gs.insert(c);
    }
    std::set_union(ps.begin(), ps.end(), gs.begin(), gs.end(), std::inserter(un, un.end()));
    std::set_intersection(ps.begin(), ps.end(), gs.begin(), gs.end(), std::inserter(in, in.end()));
    total += un.empty() ? 1.0 : static_cast<double>(in.size()) / static_cast<double>(un.size());
  }
  return p.rows ? total / static_cast<double>(p.rows) : 0.0;
}

}  // namespace

TEST_CASE("jaccard on a two-label overlap") {
  const auto p = from_rows({{0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0}});
  const auto g = from_rows({{0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0}});
  CHECK(jaccard_accuracy(p, g) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("jaccard of two empty label sets is one") {
  const BinaryMatrix none(1, 11);
  CHECK(jaccard_accuracy(none, none) == 1.0);
  CHECK(jaccard_accuracy(BinaryMatrix(0, 11), BinaryMatrix(0, 11)) == 0.0);
}

TEST_CASE("F1 on a hand-checked 4x3 example") {
  const auto p = from_rows({{1, 0, 1}, {1, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  const auto g = from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  const auto f = f1_scores(p, g);
  // class 0: tp 2 fp 1 fn 0; class 1: tp 1; class 2: fp 1 fn 1
  CHECK(f.per_class[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(f.per_class[0].recall == 1.0);
  CHECK(f.per_class[0].f1 == doctest::Approx(0.8));
  CHECK(f.per_class[1].f1 == 1.0);
  CHECK(f.per_class[2].f1 == 0.0);
  CHECK(f.per_class[2].support == 1);
  // micro: tp 3, fp 2, fn 1
  CHECK(std::abs(f.micro - 6.0 / 9.0) < 1e-15);
  CHECK(std::abs(f.macro - 1.8 / 3.0) < 1e-15);
}

TEST_CASE("a class with no gold and no predicted positives scores zero") {
  const auto p = from_rows({{1, 0}, {0, 0}});
  const auto g = from_rows({{1, 0}, {1, 0}});
  const auto f = f1_scores(p, g);
  CHECK(f.per_class[1].precision == 0.0);
  CHECK(f.per_class[1].recall == 0.0);
  CHECK(f.per_class[1].f1 == 0.0);
  CHECK(f.macro == doctest::Approx((2.0 / 3.0) / 2.0));
}

TEST_CASE("jaccard agrees with set arithmetic") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_matrix(rng, 1 + rng() % 20, 11, 1 + trial % 5);
    const auto g = random_matrix(rng, p.rows, 11, 1 + (trial / 5) % 5);
    CHECK(std::abs(jaccard_accuracy(p, g) - set_jaccard(p, g)) < 1e-12);
  }
}

TEST_CASE("metric invariances") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_matrix(rng, 12, 11, 3);
    const auto g = random_matrix(rng, 12, 11, 3);
    const auto base = evaluate_predictions(p, g);
    CHECK(base.jaccard >= 0.0);
    CHECK(base.jaccard <= 1.0);
    CHECK(base.micro_f1 <= 1.0);
    CHECK(base.macro_f1 <= 1.0);

    // perfect predictions
    CHECK(jaccard_accuracy(g, g) == 1.0);

    // row permutation
    std::vector<std::size_t> perm(12);
    for (std::size_t i = 0; i < 12; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    BinaryMatrix pp(12, 11), gp(12, 11);
    for (std::size_t r = 0; r < 12; ++r)
      for (std::size_t c = 0; c < 11; ++c) {
        pp.at(r, c) = p.at(perm[r], c);
        gp.at(r, c) = g.at(perm[r], c);
      }
    const auto permuted = evaluate_predictions(pp, gp);
    CHECK(std::abs(permuted.jaccard - base.jaccard) < 1e-12);
    CHECK(std::abs(permuted.micro_f1 - base.micro_f1) < 1e-12);
    CHECK(std::abs(permuted.macro_f1 - base.macro_f1) < 1e-12);

    // duplicating the dataset
    BinaryMatrix p2(24, 11), g2(24, 11);
    std::copy(p.cells.begin(), p.cells.end(), p2.cells.begin());
    std::copy(p.cells.begin(), p.cells.end(), p2.cells.begin() + 132);
    std::copy(g.cells.begin(), g.cells.end(), g2.cells.begin());
    std::copy(g.cells.begin(), g.cells.end(), g2.cells.begin() + 132);
    const auto doubled = evaluate_predictions(p2, g2);
    CHECK(std::abs(doubled.jaccard - base.jaccard) < 1e-12);
    CHECK(std::abs(doubled.micro_f1 - base.micro_f1) < 1e-12);
    CHECK(std::abs(doubled.macro_f1 - base.macro_f1) < 1e-12);
  }
}

TEST_CASE("thresholding is strict") {
  const std::vector<double> probs{0.5, 0.5000001, 0.2, 0.9};
  const auto m = threshold(probs, 2, 0.5);
  CHECK(m.cells == std::vector<std::uint8_t>{0, 1, 0, 1});
}

TEST_CASE("micro F1 follows the frequent class, macro weighs every class equally") {
  // class 0 common and predicted well, class 1 rare and always missed
  BinaryMatrix p(100, 2), g(100, 2);
  for (std::size_t r = 0; r < 100; ++r) {
    g.at(r, 0) = p.at(r, 0) = r < 80;
    g.at(r, 1) = r < 5;
  }
  const auto f = f1_scores(p, g);
  CHECK(f.micro > 0.9);
  CHECK(f.macro == doctest::Approx(0.5));
}

TEST_CASE("report formatting") {
  const auto p = from_rows({{1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0}});
  const auto g = from_rows({{1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}});
  const auto report = evaluate_predictions(p, g);
  CHECK(format_summary(report) == "Jaccard\t0.5000\nMicro\t0.6667\nMacro\t0.0909\n");
  const auto table = per_class_report(p, g, emotion_labels());
  CHECK(table.find("anger") != std::string::npos);
  CHECK(table.find("trust") != std::string::npos);
  const auto tsv = per_class_tsv(report, emotion_labels());
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 12);
}
