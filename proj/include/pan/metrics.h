#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pan/dataset.h"

namespace pan {

// rows x cols matrix of 0/1 label decisions.
struct BinaryMatrix {
  std::size_t rows = 0;
  std::size_t cols = kNumEmotions;
  std::vector<std::uint8_t> cells;

  BinaryMatrix() = default;
  BinaryMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), cells(r * c, 0) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return cells[r * cols + c]; }
  bool operator==(const BinaryMatrix&) const = default;
};

// 1 where the probability is strictly greater than tau.
BinaryMatrix threshold(std::span<const double> probabilities, std::size_t cols, double tau);
BinaryMatrix gold_matrix(const Dataset& data);

// Mean over rows of |P ∩ G| / |P ∪ G|; a row with both sets empty scores 1.
// An empty matrix scores 0.
double jaccard_accuracy(const BinaryMatrix& pred, const BinaryMatrix& gold);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold positives
};

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
  std::vector<ClassScores> per_class;
};

// 0/0 is taken as 0 for precision, recall and F1.
F1Scores f1_scores(const BinaryMatrix& pred, const BinaryMatrix& gold);

struct MetricsReport {
  double jaccard = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassScores> per_class;
};

MetricsReport evaluate_predictions(const BinaryMatrix& pred, const BinaryMatrix& gold);

std::vector<std::string> emotion_labels();

// "Jaccard", "Micro", "Macro" lines, tab-separated.
std::string format_summary(const MetricsReport& report);

// Aligned plain-text table: label, support, precision, recall, F1.
std::string per_class_report(const BinaryMatrix& pred, const BinaryMatrix& gold,
                             const std::vector<std::string>& label_names);

// Same rows as per_class_report as a tab-separated block with a header.
std::string per_class_tsv(const MetricsReport& report,
                          const std::vector<std::string>& label_names);

}  // namespace pan
