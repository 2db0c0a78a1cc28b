#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "granimpute/dataset.hpp"
#include "granimpute/tree.hpp"

namespace granimpute {

// Every model scores the positive class in [0,1].
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(std::span<const double> row) const = 0;
  virtual std::string_view name() const = 0;
};

class LogisticRegression : public Classifier {
 public:
  struct Params {
    double l2 = 1e-4;
    int max_epochs = 500;
    double grad_tol = 1e-6;
  };

  void fit(const Dataset& data, const Params& params);
  void fit(const Dataset& data) { fit(data, Params()); }
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "logreg"; }

  // Mean log-loss with L2 penalty and its gradient at (w, b); exposed so the
  // analytic gradient can be checked against finite differences.
  static double loss_and_grad(const Dataset& data, std::span<const double> w,
                              double b, double l2, std::vector<double>& grad_w,
                              double& grad_b);

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

 private:
  std::vector<double> w_;
  double b_ = 0.0;
};

class KnnClassifier : public Classifier {
 public:
  void fit(const Dataset& data, int k = 5);
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "knn"; }

 private:
  Dataset train_;
  int k_ = 5;
};

class DecisionTreeClassifier : public Classifier {
 public:
  void fit(const Dataset& data, int max_depth = 12, int min_leaf = 5);
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "dtree"; }

 private:
  DecisionTree tree_;
};

class RandomForest : public Classifier {
 public:
  struct Params {
    int n_trees = 200;
    int max_depth = -1;
    int min_leaf = 1;
  };

  // sqrt(d) candidate features per split, bootstrap per tree. Per-tree seeds
  // derive from `seed` so a parallel build cannot reorder results.
  void fit(const Dataset& data, const Params& params, uint64_t seed);
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "rforest"; }

  // Mean decrease in Gini impurity, averaged over trees, normalized to sum 1.
  const std::vector<double>& importances() const { return importances_; }
  double oob_accuracy() const { return oob_accuracy_; }

 private:
  std::vector<DecisionTree> trees_;
  std::vector<double> importances_;
  double oob_accuracy_ = 0.0;
};

class GradientBoosting : public Classifier {
 public:
  struct Params {
    int n_trees = 200;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 1;
  };

  void fit(const Dataset& data, const Params& params);
  void fit(const Dataset& data) { fit(data, Params()); }
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "gboost"; }

 private:
  std::vector<DecisionTree> trees_;
  double f0_ = 0.0;
  double learning_rate_ = 0.1;
};

class NeuralNet : public Classifier {
 public:
  struct Params {
    int hidden = 32;
    double learning_rate = 0.01;
    int epochs = 100;
    int batch = 32;
  };

  void fit(const Dataset& data, const Params& params, uint64_t seed);
  double score(std::span<const double> row) const override;
  std::string_view name() const override { return "nnet"; }

  // Flat parameter access for gradient checking.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  double loss_and_grad(const Dataset& data, std::span<const size_t> rows,
                       std::vector<double>& grad) const;
  void init(size_t input_dim, int hidden, uint64_t seed);

 private:
  size_t in_dim_ = 0;
  int hidden_ = 0;
  std::vector<double> w1_;  // hidden x in
  std::vector<double> b1_;  // hidden
  std::vector<double> w2_;  // hidden
  double b2_ = 0.0;
};

// Factory keyed by the CLI names: logreg, knn, dtree, rforest, gboost, nnet.
// Throws ConfigError for an unknown kind and DataError for non-finite
// features or a single-class training set.
std::unique_ptr<Classifier> train_classifier(const std::string& kind,
                                             const Dataset& train,
                                             uint64_t seed);

double sigmoid(double z);

}  // namespace granimpute
