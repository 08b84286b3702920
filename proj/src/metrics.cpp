#include "pan/metrics.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "pan/errors.h"

namespace pan {

namespace {

void require_same_shape(const BinaryMatrix& pred, const BinaryMatrix& gold) {
  if (pred.rows != gold.rows || pred.cols != gold.cols) {
    throw DimensionError("prediction matrix " + std::to_string(pred.rows) + "x" +
                         std::to_string(pred.cols) + " does not match gold " +
                         std::to_string(gold.rows) + "x" + std::to_string(gold.cols));
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_from(double precision, double recall) {
  return ratio(2.0 * precision * recall, precision + recall);
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

BinaryMatrix threshold(std::span<const double> probabilities, std::size_t cols, double tau) {
  if (cols == 0 || probabilities.size() % cols != 0) {
    throw DimensionError("probabilities do not form rows of " + std::to_string(cols));
  }
  BinaryMatrix out(probabilities.size() / cols, cols);
  for (std::size_t i = 0; i < probabilities.size(); ++i) out.cells[i] = probabilities[i] > tau;
  return out;
}

BinaryMatrix gold_matrix(const Dataset& data) {
  BinaryMatrix out(data.size(), kNumEmotions);
  for (std::size_t r = 0; r < data.size(); ++r)
    for (std::size_t c = 0; c < kNumEmotions; ++c) out.at(r, c) = data.examples[r].labels[c];
  return out;
}

double jaccard_accuracy(const BinaryMatrix& pred, const BinaryMatrix& gold) {
  require_same_shape(pred, gold);
  if (pred.rows == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < pred.rows; ++r) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t c = 0; c < pred.cols; ++c) {
      const bool p = pred.at(r, c), g = gold.at(r, c);
      inter += p && g;
      uni += p || g;
    }
    total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return total / static_cast<double>(pred.rows);
}

F1Scores f1_scores(const BinaryMatrix& pred, const BinaryMatrix& gold) {
  require_same_shape(pred, gold);
  F1Scores out;
  out.per_class.resize(pred.cols);
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro = 0.0;
  for (std::size_t c = 0; c < pred.cols; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < pred.rows; ++r) {
      const bool p = pred.at(r, c), g = gold.at(r, c);
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    auto& cls = out.per_class[c];
    cls.support = tp + fn;
    cls.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
    cls.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
    cls.f1 = f1_from(cls.precision, cls.recall);
    macro += cls.f1;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  const double micro_p = ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fp_all));
  const double micro_r = ratio(static_cast<double>(tp_all), static_cast<double>(tp_all + fn_all));
  out.micro = f1_from(micro_p, micro_r);
  out.macro = pred.cols ? macro / static_cast<double>(pred.cols) : 0.0;
  return out;
}

MetricsReport evaluate_predictions(const BinaryMatrix& pred, const BinaryMatrix& gold) {
  MetricsReport report;
  report.jaccard = jaccard_accuracy(pred, gold);
  auto f1 = f1_scores(pred, gold);
  report.micro_f1 = f1.micro;
  report.macro_f1 = f1.macro;
  report.per_class = std::move(f1.per_class);
  return report;
}

std::vector<std::string> emotion_labels() {
  return {kEmotionNames.begin(), kEmotionNames.end()};
}

std::string format_summary(const MetricsReport& report) {
  return "Jaccard\t" + fixed(report.jaccard) + "\nMicro\t" + fixed(report.micro_f1) +
         "\nMacro\t" + fixed(report.macro_f1) + "\n";
}

std::string per_class_report(const BinaryMatrix& pred, const BinaryMatrix& gold,
                             const std::vector<std::string>& label_names) {
  const auto scores = f1_scores(pred, gold);
  if (label_names.size() != scores.per_class.size()) {
    throw DimensionError("per_class_report: " + std::to_string(label_names.size()) +
                         " names for " + std::to_string(scores.per_class.size()) + " classes");
  }
  std::size_t width = 7;
  for (const auto& n : label_names) width = std::max(width, n.size());
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %8s %9s %9s %9s\n", static_cast<int>(width), "emotion",
                "support", "precision", "recall", "f1");
  os << line;
  for (std::size_t c = 0; c < label_names.size(); ++c) {
    const auto& s = scores.per_class[c];
    std::snprintf(line, sizeof line, "%-*s %8zu %9.4f %9.4f %9.4f\n", static_cast<int>(width),
                  label_names[c].c_str(), s.support, s.precision, s.recall, s.f1);
    os << line;
  }
  return os.str();
}

std::string per_class_tsv(const MetricsReport& report,
                          const std::vector<std::string>& label_names) {
  if (label_names.size() != report.per_class.size()) {
    throw DimensionError("per_class_tsv: label count mismatch");
  }
  std::ostringstream os;
  os << "emotion\tsupport\tprecision\trecall\tf1\n";
  for (std::size_t c = 0; c < label_names.size(); ++c) {
    const auto& s = report.per_class[c];
    os << label_names[c] << '\t' << s.support << '\t' << fixed(s.precision, 6) << '\t'
       << fixed(s.recall, 6) << '\t' << fixed(s.f1, 6) << '\n';
  }
  return os.str();
}

}  // namespace pan
