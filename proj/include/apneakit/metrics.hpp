#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apneakit/error.hpp"

namespace apneakit {

// Rows are predicted classes, columns are true classes.
struct ConfusionMatrix {
  int k = 0;
  std::vector<int64_t> counts;

  explicit ConfusionMatrix(int classes = 0)
      : k(classes), counts(size_t(classes) * size_t(classes), 0) {}

  int64_t& at(int pred, int truth) {
    return counts[size_t(pred) * size_t(k) + size_t(truth)];
  }
  int64_t at(int pred, int truth) const {
    return counts[size_t(pred) * size_t(k) + size_t(truth)];
  }
  int64_t total() const;
  int64_t row_sum(int pred) const;
  int64_t col_sum(int truth) const;

  std::string to_table(std::span<const std::string> class_names) const;
};

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& truths, int k);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some 0/0 ratio was reported as 0
};

struct MetricSummary {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_specificity = 0.0;
  double macro_f1 = 0.0;
};

// One-vs-rest per class; 0/0 ratios become 0 and set the degenerate flag.
MetricSummary summarize(const ConfusionMatrix& cm);

std::string metrics_to_json(const MetricSummary& summary,
                            std::span<const std::string> class_names);

struct RocCurve {
  std::vector<double> thresholds;  // descending; one per operating point
  std::vector<double> fpr;         // ascending
  std::vector<double> tpr;
  double auc = 0.0;
};

// Threshold sweep over the unique scores; the trapezoid rule over the grouped
// points gives ties half credit, matching the Mann-Whitney statistic.
RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace apneakit
