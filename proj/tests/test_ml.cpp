#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "granimpute/classifiers.hpp"
#include "granimpute/common.hpp"
#include "granimpute/dataset.hpp"
#include "granimpute/metrics.hpp"
#include "granimpute/rng.hpp"
#include "granimpute/tree.hpp"
#include "test_support.hpp"

using namespace granimpute;
namespace ts = testsupport;

namespace {

// Two Gaussian blobs around +-center, one per class.
Dataset make_blobs(Rng& rng, size_t n_per_class, size_t dims, double center) {
  Dataset d;
  d.n_cols = dims;
  std::vector<double> row(dims);
  for (size_t i = 0; i < 2 * n_per_class; ++i) {
    const int label = i % 2;
    for (size_t c = 0; c < dims; ++c) {
      row[c] = (label ? center : -center) + rng.normal();
    }
    d.push_row(row, label);
  }
  return d;
}

double accuracy_on(const Classifier& m, const Dataset& d) {
  size_t hit = 0;
  for (size_t r = 0; r < d.n_rows; ++r) {
    hit += (m.score(d.row(r)) >= 0.5 ? 1 : 0) == d.y[r];
  }
  return static_cast<double>(hit) / static_cast<double>(d.n_rows);
}

std::vector<size_t> all_rows(const Dataset& d) {
  std::vector<size_t> rows(d.n_rows);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

TEST_CASE("gini impurity hand values") {
  CHECK(gini_impurity(0, 5) == 0.0);
  CHECK(gini_impurity(5, 5) == 0.0);
  CHECK(gini_impurity(1, 2) == 0.5);
  CHECK(gini_impurity(1, 4) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(gini_impurity(0, 0) == 0.0);
}

TEST_CASE("tree carves nested intervals on one feature") {
  // Positive inside (0.3, 0.7), negative outside: needs two stacked splits.
  Dataset d;
  d.n_cols = 1;
  for (int i = 0; i < 40; ++i) {
    const double x = i / 39.0;
    const double cell[1] = {x};
    d.push_row(cell, x > 0.3 && x < 0.7 ? 1 : 0);
  }
  DecisionTree tree;
  tree.fit_classification(d, all_rows(d), TreeParams{}, nullptr);
  for (size_t r = 0; r < d.n_rows; ++r) {
    CHECK((tree.predict(d.row(r)) >= 0.5 ? 1 : 0) == d.y[r]);
  }

  SUBCASE("depth zero collapses to the positive fraction") {
    TreeParams p;
    p.max_depth = 0;
    DecisionTree stump;
    stump.fit_classification(d, all_rows(d), p, nullptr);
    const double frac =
        std::accumulate(d.y.begin(), d.y.end(), 0.0) / d.n_rows;
    for (size_t r = 0; r < d.n_rows; ++r) {
      CHECK(stump.predict(d.row(r)) == doctest::Approx(frac).epsilon(1e-12));
    }
  }
  SUBCASE("min_leaf larger than half the sample forbids any split") {
    TreeParams p;
    p.min_leaf = static_cast<int>(d.n_rows);
    DecisionTree stump;
    stump.fit_classification(d, all_rows(d), p, nullptr);
    CHECK(tree.predict(d.row(0)) != stump.predict(d.row(5)));
    CHECK(stump.predict(d.row(0)) == stump.predict(d.row(20)));
  }
}

TEST_CASE("split threshold sits on the left value of the adjacent pair") {
  // One feature, classes separated between 2.0 and 5.0; every row must land
  // on its own side, including a probe at the threshold itself.
  Dataset d;
  d.n_cols = 1;
  for (double x : {1.0, 2.0}) {
    const double cell[1] = {x};
    d.push_row(cell, 0);
  }
  for (double x : {5.0, 6.0}) {
    const double cell[1] = {x};
    d.push_row(cell, 1);
  }
  DecisionTree tree;
  tree.fit_classification(d, all_rows(d), TreeParams{}, nullptr);
  const double at_threshold[1] = {2.0};  // boundary goes left
  CHECK(tree.predict(at_threshold) < 0.5);
  const double above[1] = {2.0000001};
  CHECK(tree.predict(above) >= 0.5);
}

TEST_CASE("planted feature earns the importance mass") {
  Rng rng(303);
  Dataset d;
  d.n_cols = 4;
  std::vector<double> row(4);
  for (int i = 0; i < 120; ++i) {
    const int label = static_cast<int>(rng.below(2));
    for (int c = 0; c < 4; ++c) row[c] = rng.uniform(-1.0, 1.0);
    row[2] = label ? rng.uniform(0.2, 1.0) : rng.uniform(-1.0, -0.2);
    d.push_row(row, label);
  }
  DecisionTree tree;
  std::vector<double> importance;
  tree.fit_classification(d, all_rows(d), TreeParams{}, nullptr, &importance);
  REQUIRE(importance.size() == 4);
  for (double v : importance) CHECK(v >= 0.0);
  CHECK(importance[2] > importance[0]);
  CHECK(importance[2] > importance[1]);
  CHECK(importance[2] > importance[3]);
}

TEST_CASE("regression tree reproduces Newton leaf values") {
  // Gradients +-1 split perfectly by the single feature; hessians 0.5 make
  // each leaf sum(g)/sum(h) = +-2.
  Dataset d;
  d.n_cols = 1;
  std::vector<double> grad, hess;
  for (int i = 0; i < 10; ++i) {
    const double cell[1] = {static_cast<double>(i)};
    d.push_row(cell, 0);
    grad.push_back(i < 5 ? -1.0 : 1.0);
    hess.push_back(0.5);
  }
  DecisionTree tree;
  tree.fit_regression(d, all_rows(d), grad, hess, TreeParams{}, nullptr);
  const double lo[1] = {2.0};
  const double hi[1] = {7.0};
  CHECK(tree.predict(lo) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(tree.predict(hi) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("logistic gradient matches central differences") {
  Rng rng(404);
  for (int inst = 0; inst < 20; ++inst) {
    const size_t n = 5 + rng.below(20);
    const size_t dims = 1 + rng.below(4);
    Dataset d = make_blobs(rng, n, dims, 1.0);
    std::vector<double> w(dims);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    double b = rng.uniform(-1.0, 1.0);
    const double l2 = rng.uniform() < 0.5 ? 0.0 : 0.1;

    std::vector<double> grad_w(dims);
    double grad_b = 0.0;
    LogisticRegression::loss_and_grad(d, w, b, l2, grad_w, grad_b);

    std::vector<double> flat = w;
    flat.push_back(b);
    auto loss_at = [&](std::vector<double>& p) {
      std::vector<double> gw(dims);
      double gb = 0.0;
      return LogisticRegression::loss_and_grad(
          d, std::span<const double>(p.data(), dims), p[dims], l2, gw, gb);
    };
    for (size_t i = 0; i < dims; ++i) {
      const double fd = ts::finite_diff(loss_at, flat, i);
      CHECK(ts::rel_err(grad_w[i], fd) < 1e-4);
    }
    const double fd_b = ts::finite_diff(loss_at, flat, dims);
    CHECK(ts::rel_err(grad_b, fd_b) < 1e-4);
  }
}

TEST_CASE("logistic regression separates clean blobs") {
  Rng rng(42);
  const Dataset train = make_blobs(rng, 60, 3, 2.0);
  const Dataset test = make_blobs(rng, 30, 3, 2.0);
  LogisticRegression m;
  m.fit(train);
  CHECK(accuracy_on(m, test) >= 0.95);
  CHECK(m.weights().size() == 3);
  // Scores are calibrated probabilities, not raw margins.
  for (size_t r = 0; r < test.n_rows; ++r) {
    const double s = m.score(test.row(r));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("neural net gradient matches central differences") {
  Rng rng(505);
  for (int inst = 0; inst < 20; ++inst) {
    const size_t dims = 2 + rng.below(3);
    const Dataset d = make_blobs(rng, 3 + rng.below(4), dims, 1.5);
    NeuralNet net;
    net.init(dims, 4, 1000 + inst);
    const std::vector<size_t> rows = all_rows(d);

    std::vector<double> analytic;
    net.loss_and_grad(d, rows, analytic);
    std::vector<double> flat = net.parameters();
    REQUIRE(analytic.size() == flat.size());

    auto loss_at = [&](std::vector<double>& p) {
      NeuralNet probe = net;
      probe.set_parameters(p);
      std::vector<double> g;
      return probe.loss_and_grad(d, rows, g);
    };
    for (size_t i = 0; i < flat.size(); ++i) {
      const double fd = ts::finite_diff(loss_at, flat, i);
      CHECK(ts::rel_err(analytic[i], fd) < 1e-4);
    }
  }
}

TEST_CASE("auc equals pair counting on random score sets") {
  Rng rng(606);
  for (int it = 0; it < 50; ++it) {
    const size_t n = 3 + rng.below(38);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const bool quantized = rng.below(2) == 0;  // force heavy ties half the time
    for (size_t i = 0; i < n; ++i) {
      scores[i] = quantized ? static_cast<double>(rng.below(5)) / 4.0
                            : rng.uniform();
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 1;
    labels[n - 1] = 0;
    const EvalReport rep = evaluate_scores(scores, labels, "probe");
    CHECK(std::abs(rep.auc - ts::mann_whitney_auc(scores, labels)) < 1e-12);
  }
}

TEST_CASE("confusion, accuracy, and roc on a hand-checked set") {
  const std::vector<double> scores = {0.9, 0.6, 0.4, 0.2};
  const std::vector<int> labels = {1, 0, 1, 0};
  const EvalReport rep = evaluate_scores(scores, labels, "hand");
  CHECK(rep.classifier == "hand");
  CHECK(rep.confusion.tp == 1);
  CHECK(rep.confusion.fp == 1);
  CHECK(rep.confusion.fn == 1);
  CHECK(rep.confusion.tn == 1);
  CHECK(rep.accuracy == 0.5);
  CHECK(rep.recall_pos == 0.5);
  CHECK(rep.recall_neg == 0.5);
  CHECK(rep.auc == doctest::Approx(0.75).epsilon(1e-12));
  REQUIRE(rep.roc.size() == 5);
  CHECK(rep.roc.front() == std::array<double, 2>{0.0, 0.0});
  CHECK(rep.roc[1] == std::array<double, 2>{0.0, 0.5});
  CHECK(rep.roc[2] == std::array<double, 2>{0.5, 0.5});
  CHECK(rep.roc[3] == std::array<double, 2>{0.5, 1.0});
  CHECK(rep.roc.back() == std::array<double, 2>{1.0, 1.0});
}

TEST_CASE("roc endpoints and degenerate score sets") {
  SUBCASE("perfect separation") {
    const EvalReport rep =
        evaluate_scores({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}, "x");
    CHECK(rep.auc == 1.0);
    CHECK(rep.accuracy == 1.0);
  }
  SUBCASE("inverted separation") {
    const EvalReport rep =
        evaluate_scores({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}, "x");
    CHECK(rep.auc == 0.0);
  }
  SUBCASE("all scores tied") {
    const EvalReport rep =
        evaluate_scores({0.7, 0.7, 0.7, 0.7}, {1, 0, 1, 0}, "x");
    CHECK(rep.auc == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(rep.roc.size() == 2);
    CHECK(rep.roc.front() == std::array<double, 2>{0.0, 0.0});
    CHECK(rep.roc.back() == std::array<double, 2>{1.0, 1.0});
  }
  SUBCASE("roc marches monotonically to (1,1)") {
    Rng rng(707);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
      scores.push_back(rng.uniform());
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    labels[0] = 1;
    labels[1] = 0;
    const EvalReport rep = evaluate_scores(scores, labels, "x");
    CHECK(rep.roc.front() == std::array<double, 2>{0.0, 0.0});
    CHECK(rep.roc.back() == std::array<double, 2>{1.0, 1.0});
    for (size_t i = 1; i < rep.roc.size(); ++i) {
      CHECK(rep.roc[i][0] >= rep.roc[i - 1][0]);
      CHECK(rep.roc[i][1] >= rep.roc[i - 1][1]);
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(evaluate_scores({}, {}, "x"), ConfigError);
    CHECK_THROWS_AS(evaluate_scores({0.5}, {1, 0}, "x"), ConfigError);
  }
}

TEST_CASE("nearest-neighbor scores are local positive fractions") {
  Dataset d;
  d.n_cols = 1;
  for (double x : {0.0, 0.1, 0.2}) {
    const double cell[1] = {x};
    d.push_row(cell, 0);
  }
  for (double x : {10.0, 10.1, 10.2}) {
    const double cell[1] = {x};
    d.push_row(cell, 1);
  }
  KnnClassifier m;
  m.fit(d, 3);
  const double lo[1] = {0.05};
  const double hi[1] = {10.05};
  CHECK(m.score(lo) == 0.0);
  CHECK(m.score(hi) == 1.0);
  const double mid[1] = {5.2};  // slightly nearer the positive cluster
  KnnClassifier one;
  one.fit(d, 6);
  CHECK(one.score(mid) == 0.5);  // all six neighbors, half positive
}

TEST_CASE("every factory classifier learns well-separated blobs") {
  Rng rng(808);
  const Dataset train = make_blobs(rng, 50, 4, 2.6);
  const Dataset test = make_blobs(rng, 25, 4, 2.6);
  for (const char* kind :
       {"logreg", "knn", "dtree", "rforest", "gboost", "nnet"}) {
    CAPTURE(kind);
    const auto model = train_classifier(kind, train, 7);
    CHECK(model->name() == kind);
    CHECK(accuracy_on(*model, test) >= 0.9);
  }
}

TEST_CASE("factory rejects unknown kinds and unusable data") {
  Rng rng(909);
  const Dataset good = make_blobs(rng, 10, 2, 2.0);
  CHECK_THROWS_AS(train_classifier("svm", good, 1), ConfigError);

  Dataset single;
  single.n_cols = 2;
  const double cell[2] = {1.0, 2.0};
  single.push_row(cell, 1);
  single.push_row(cell, 1);
  CHECK_THROWS_AS(train_classifier("logreg", single, 1), DataError);

  Dataset empty;
  empty.n_cols = 2;
  CHECK_THROWS_AS(train_classifier("logreg", empty, 1), DataError);

  Dataset poisoned = good;
  poisoned.x[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train_classifier("dtree", poisoned, 1), DataError);
}

TEST_CASE("forest seeds give reproducible models and sane diagnostics") {
  Rng rng(111);
  const Dataset train = make_blobs(rng, 40, 3, 1.5);
  RandomForest a, b;
  RandomForest::Params p;
  p.n_trees = 25;
  a.fit(train, p, 99);
  b.fit(train, p, 99);
  for (size_t r = 0; r < train.n_rows; r += 7) {
    CHECK(a.score(train.row(r)) == b.score(train.row(r)));
  }
  REQUIRE(a.importances().size() == 3);
  double sum = 0.0;
  for (double v : a.importances()) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(a.oob_accuracy() > 0.8);
  CHECK(a.oob_accuracy() <= 1.0);

  SUBCASE("a different seed grows a different forest") {
    RandomForest c;
    c.fit(train, p, 100);
    bool any_diff = false;
    for (size_t r = 0; r < train.n_rows && !any_diff; ++r) {
      any_diff = c.score(train.row(r)) != a.score(train.row(r));
    }
    CHECK(any_diff);
  }
}

TEST_CASE("boosting fits closer with every stage on noisy data") {
  Rng rng(222);
  const Dataset train = make_blobs(rng, 60, 2, 0.8);  // heavy overlap
  GradientBoosting weak, strong;
  GradientBoosting::Params p;
  p.n_trees = 1;
  weak.fit(train, p);
  p.n_trees = 80;
  strong.fit(train, p);
  CHECK(accuracy_on(strong, train) > accuracy_on(weak, train));
  CHECK(accuracy_on(strong, train) >= 0.9);
}
