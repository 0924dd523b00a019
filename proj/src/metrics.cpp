#include "apneakit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "apneakit/text.hpp"

namespace apneakit {

int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t(0));
}

int64_t ConfusionMatrix::row_sum(int pred) const {
  int64_t sum = 0;
  for (int t = 0; t < k; ++t) sum += at(pred, t);
  return sum;
}

int64_t ConfusionMatrix::col_sum(int truth) const {
  int64_t sum = 0;
  for (int p = 0; p < k; ++p) sum += at(p, truth);
  return sum;
}

std::string ConfusionMatrix::to_table(
    std::span<const std::string> class_names) const {
  size_t width = 8;
  for (const auto& name : class_names) width = std::max(width, name.size() + 1);
  const auto pad = [&](const std::string& s) {
    return std::string(width > s.size() ? width - s.size() : 1, ' ') + s;
  };
  std::ostringstream out;
  out << pad("pred\\true");
  for (int t = 0; t < k; ++t)
    out << pad(t < int(class_names.size()) ? class_names[size_t(t)]
                                           : std::to_string(t));
  out << '\n';
  for (int p = 0; p < k; ++p) {
    out << pad(p < int(class_names.size()) ? class_names[size_t(p)]
                                           : std::to_string(p));
    for (int t = 0; t < k; ++t) out << pad(std::to_string(at(p, t)));
    out << '\n';
  }
  return out.str();
}

ConfusionMatrix confusion(const std::vector<int>& preds,
                          const std::vector<int>& truths, int k) {
  if (preds.size() != truths.size())
    fail(ErrorCode::length_mismatch,
         "confusion: " + std::to_string(preds.size()) + " predictions vs " +
             std::to_string(truths.size()) + " truths");
  ConfusionMatrix cm(k);
  for (size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= k || truths[i] < 0 || truths[i] >= k)
      fail(ErrorCode::label_out_of_range,
           "confusion: label outside [0, " + std::to_string(k) + ")");
    ++cm.at(preds[i], truths[i]);
  }
  return cm;
}

namespace {

double ratio_or_zero(double num, double den, bool& degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

}  // namespace

MetricSummary summarize(const ConfusionMatrix& cm) {
  MetricSummary summary;
  const double total = double(cm.total());
  int64_t diag = 0;
  for (int c = 0; c < cm.k; ++c) diag += cm.at(c, c);
  summary.accuracy = total > 0 ? double(diag) / total : 0.0;

  for (int c = 0; c < cm.k; ++c) {
    const double tp = double(cm.at(c, c));
    const double fp = double(cm.row_sum(c)) - tp;
    const double fn = double(cm.col_sum(c)) - tp;
    const double tn = total - tp - fp - fn;

    ClassMetrics m;
    m.precision = ratio_or_zero(tp, tp + fp, m.degenerate);
    m.recall = ratio_or_zero(tp, tp + fn, m.degenerate);
    m.specificity = ratio_or_zero(tn, tn + fp, m.degenerate);
    m.f1 = ratio_or_zero(2.0 * m.precision * m.recall,
                         m.precision + m.recall, m.degenerate);
    summary.per_class.push_back(m);
  }

  for (const auto& m : summary.per_class) {
    summary.macro_precision += m.precision;
    summary.macro_recall += m.recall;
    summary.macro_specificity += m.specificity;
    summary.macro_f1 += m.f1;
  }
  if (cm.k > 0) {
    summary.macro_precision /= cm.k;
    summary.macro_recall /= cm.k;
    summary.macro_specificity /= cm.k;
    summary.macro_f1 /= cm.k;
  }
  return summary;
}

std::string metrics_to_json(const MetricSummary& summary,
                            std::span<const std::string> class_names) {
  std::ostringstream out;
  const auto num = [](double v) { return fmt_fixed(v, 6); };
  out << "{\n  \"accuracy\": " << num(summary.accuracy) << ",\n";
  out << "  \"classes\": [\n";
  for (size_t c = 0; c < summary.per_class.size(); ++c) {
    const auto& m = summary.per_class[c];
    out << "    {\"name\": \""
        << (c < class_names.size() ? class_names[c] : std::to_string(c))
        << "\", \"precision\": " << num(m.precision)
        << ", \"recall\": " << num(m.recall)
        << ", \"specificity\": " << num(m.specificity)
        << ", \"f1\": " << num(m.f1)
        << ", \"degenerate\": " << (m.degenerate ? "true" : "false") << "}"
        << (c + 1 < summary.per_class.size() ? "," : "") << '\n';
  }
  out << "  ],\n";
  out << "  \"macro_precision\": " << num(summary.macro_precision) << ",\n";
  out << "  \"macro_recall\": " << num(summary.macro_recall) << ",\n";
  out << "  \"macro_specificity\": " << num(summary.macro_specificity)
      << ",\n";
  out << "  \"macro_f1\": " << num(summary.macro_f1) << "\n}\n";
  return out.str();
}

RocCurve roc_auc(const std::vector<double>& scores,
                 const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorCode::length_mismatch, "roc: score/label count mismatch");
  int64_t pos = 0, neg = 0;
  for (int l : labels) (l != 0 ? pos : neg)++;
  if (pos == 0 || neg == 0)
    fail(ErrorCode::one_class_only, "roc needs both classes present");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  int64_t tp = 0, fp = 0;
  double auc = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    const double score = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == score) {
      (labels[order[i]] != 0 ? tp : fp)++;
      ++i;
    }
    const double x = double(fp) / double(neg);
    const double y = double(tp) / double(pos);
    auc += (x - curve.fpr.back()) * (y + curve.tpr.back()) / 2.0;
    curve.thresholds.push_back(score);
    curve.fpr.push_back(x);
    curve.tpr.push_back(y);
  }
  curve.auc = auc;
  return curve;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    fail(ErrorCode::length_mismatch, "pearson: length mismatch");
  if (x.size() < 2)
    fail(ErrorCode::degenerate_variance, "pearson needs at least 2 points");
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    fail(ErrorCode::degenerate_variance, "pearson: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace apneakit
