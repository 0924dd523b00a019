#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "apneakit/metrics.hpp"

using namespace apneakit;

namespace {

// O(n^2) pair-counting statistic with half credit for ties.
double mann_whitney_auc(const std::vector<double>& scores,
                        const std::vector<int>& labels) {
  double wins = 0.0;
  int64_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  return wins / double(pairs);
}

double pearson_two_pass(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double num = 0, dx2 = 0, dy2 = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    dx2 += (x[i] - mx) * (x[i] - mx);
    dy2 += (y[i] - my) * (y[i] - my);
  }
  return num / std::sqrt(dx2 * dy2);
}

}  // namespace

TEST_CASE("confusion matrix counting and orientation") {
  SUBCASE("diagonal case") {
    const auto cm = confusion({0, 1, 1}, {0, 1, 1}, 2);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 1) == 2);
    CHECK(cm.at(0, 1) == 0);
    CHECK(cm.total() == 3);
  }
  SUBCASE("empty inputs give a zero matrix") {
    const auto cm = confusion({}, {}, 3);
    CHECK(cm.total() == 0);
  }
  SUBCASE("rows are predictions, columns are truth") {
    const auto cm = confusion({0, 0}, {1, 1}, 2);
    CHECK(cm.at(0, 1) == 2);
    CHECK(cm.at(1, 0) == 0);
  }
  SUBCASE("length and range validation") {
    try {
      confusion({0}, {0, 1}, 2);
      FAIL("expected length_mismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::length_mismatch);
    }
    try {
      confusion({0, 2}, {0, 1}, 2);
      FAIL("expected label_out_of_range");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::label_out_of_range);
    }
  }
}

TEST_CASE("summarize reproduces the published screening row") {
  // TP=88 FP=2 / FN=2 TN=8 with class 0 as the positive screen
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 88;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 2;
  cm.at(1, 1) = 8;
  const auto summary = summarize(cm);
  CHECK(summary.accuracy == doctest::Approx(0.960).epsilon(5e-4));
  CHECK(summary.per_class[0].precision == doctest::Approx(0.978).epsilon(5e-4));
  CHECK(summary.per_class[0].recall == doctest::Approx(0.978).epsilon(5e-4));
  CHECK(summary.per_class[0].specificity == doctest::Approx(0.800).epsilon(5e-4));
  CHECK(summary.per_class[0].f1 == doctest::Approx(0.978).epsilon(5e-4));
  // complementary class mirrors it
  CHECK(summary.per_class[1].precision == doctest::Approx(0.800).epsilon(5e-4));
  CHECK(summary.per_class[1].specificity == doctest::Approx(0.978).epsilon(5e-4));
}

TEST_CASE("summarize edge cases") {
  SUBCASE("perfect diagonal") {
    ConfusionMatrix cm(3);
    cm.at(0, 0) = 5;
    cm.at(1, 1) = 4;
    cm.at(2, 2) = 7;
    const auto summary = summarize(cm);
    CHECK(summary.accuracy == doctest::Approx(1.0));
    for (const auto& m : summary.per_class) {
      CHECK(m.precision == doctest::Approx(1.0));
      CHECK(m.recall == doctest::Approx(1.0));
      CHECK(m.f1 == doctest::Approx(1.0));
    }
  }
  SUBCASE("all-one-class predictions") {
    const auto cm = confusion({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
    const auto summary = summarize(cm);
    CHECK(summary.per_class[0].recall == doctest::Approx(1.0));
    CHECK(summary.per_class[1].recall == doctest::Approx(0.0));
    CHECK(summary.per_class[1].degenerate);  // precision 0/0
  }
  SUBCASE("accuracy equals trace over total") {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> label(0, 3);
    std::vector<int> preds, truths;
    for (int i = 0; i < 500; ++i) {
      preds.push_back(label(rng));
      truths.push_back(label(rng));
    }
    const auto cm = confusion(preds, truths, 4);
    int64_t diag = 0;
    for (int c = 0; c < 4; ++c) diag += cm.at(c, c);
    CHECK(summarize(cm).accuracy == doctest::Approx(double(diag) / 500.0));
  }
  SUBCASE("binary symmetry: recall of one class is the other's specificity") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> label(0, 1);
    std::vector<int> preds, truths;
    for (int i = 0; i < 300; ++i) {
      preds.push_back(label(rng));
      truths.push_back(label(rng));
    }
    const auto summary = summarize(confusion(preds, truths, 2));
    CHECK(summary.per_class[1].recall ==
          doctest::Approx(summary.per_class[0].specificity));
  }
}

TEST_CASE("roc_auc endpoints and degenerate labels") {
  SUBCASE("perfect separation") {
    const auto curve =
        roc_auc({0.9, 0.8, 0.7, 0.2, 0.1}, {1, 1, 1, 0, 0});
    CHECK(curve.auc == doctest::Approx(1.0));
    CHECK(curve.fpr.front() == 0.0);
    CHECK(curve.tpr.back() == 1.0);
  }
  SUBCASE("identical scores give 0.5") {
    const auto curve = roc_auc({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0});
    CHECK(curve.auc == doctest::Approx(0.5));
  }
  SUBCASE("one class only") {
    try {
      roc_auc({0.1, 0.2}, {1, 1});
      FAIL("expected one_class_only");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::one_class_only);
    }
  }
}

TEST_CASE("roc_auc matches pair counting with ties to 1e-12") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, 1);
  std::uniform_int_distribution<int> quantize(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < 200; ++i) {
      double s = score(rng);
      if (quantize(rng)) s = std::round(s * 8.0) / 8.0;  // force ties
      scores.push_back(s);
      labels.push_back(label(rng));
      (labels.back() ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    const auto curve = roc_auc(scores, labels);
    CHECK(std::abs(curve.auc - mann_whitney_auc(scores, labels)) < 1e-12);
    // points ordered by FPR, AUC equals the stored trapezoid
    double auc = 0;
    for (size_t i = 1; i < curve.fpr.size(); ++i) {
      CHECK(curve.fpr[i] >= curve.fpr[i - 1]);
      auc += (curve.fpr[i] - curve.fpr[i - 1]) *
             (curve.tpr[i] + curve.tpr[i - 1]) / 2.0;
    }
    CHECK(auc == doctest::Approx(curve.auc).epsilon(1e-12));
  }
}

TEST_CASE("roc_auc is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> score(-3.0, 3.0);
  std::uniform_int_distribution<int> label(0, 1);
  std::vector<double> scores, warped;
  std::vector<int> labels;
  for (int i = 0; i < 150; ++i) {
    scores.push_back(score(rng));
    warped.push_back(std::exp(scores.back()) + scores.back());
    labels.push_back(label(rng));
  }
  CHECK(roc_auc(scores, labels).auc ==
        doctest::Approx(roc_auc(warped, labels).auc).epsilon(1e-12));
}

TEST_CASE("pearson: exact lines, oracle agreement, affine behavior") {
  std::vector<double> x;
  for (int i = 0; i < 20; ++i) x.push_back(double(i) * 0.7 - 3.0);

  std::vector<double> y_up, y_down;
  for (double v : x) {
    y_up.push_back(v);
    y_down.push_back(-2.0 * v + 7.0);
  }
  CHECK(pearson(x, y_up) == doctest::Approx(1.0));
  CHECK(pearson(x, y_down) == doctest::Approx(-1.0));

  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> a, b;
  for (int i = 0; i < 50; ++i) {
    a.push_back(gauss(rng));
    b.push_back(gauss(rng) + 0.4 * a.back());
  }
  CHECK(std::abs(pearson(a, b) - pearson_two_pass(a, b)) < 1e-12);

  // positive-affine invariance, sign flip under negative scale
  std::vector<double> a_scaled;
  for (double v : a) a_scaled.push_back(3.5 * v + 11.0);
  CHECK(pearson(a_scaled, b) == doctest::Approx(pearson(a, b)).epsilon(1e-12));
  std::vector<double> a_neg;
  for (double v : a) a_neg.push_back(-2.0 * v);
  CHECK(pearson(a_neg, b) == doctest::Approx(-pearson(a, b)).epsilon(1e-12));

  SUBCASE("degenerate variance") {
    const std::vector<double> flat(a.size(), 4.0);
    try {
      pearson(flat, b);
      FAIL("expected degenerate_variance");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_variance);
    }
  }
}
