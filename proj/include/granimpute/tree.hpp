#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "granimpute/dataset.hpp"
#include "granimpute/rng.hpp"

namespace granimpute {

struct TreeParams {
  int max_depth = -1;        // -1 = unbounded
  int min_leaf = 1;          // minimum samples on each side of a split
  int n_split_features = -1; // candidate features per split, -1 = all
};

// CART tree over continuous features. Classification mode splits on Gini
// impurity and stores the positive-class fraction at each leaf; regression
// mode splits on variance and stores sum(gradient)/sum(hessian), the leaf
// value used by boosting.
class DecisionTree {
 public:
  void fit_classification(const Dataset& data, std::span<const size_t> rows,
                          const TreeParams& params, Rng* rng,
                          std::vector<double>* importance_out = nullptr);

  void fit_regression(const Dataset& data, std::span<const size_t> rows,
                      std::span<const double> gradient,
                      std::span<const double> hessian,
                      const TreeParams& params, Rng* rng);

  double predict(std::span<const double> row) const;
  bool empty() const { return nodes_.empty(); }

 private:
  struct Node {
    int feature = -1;  // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes_;
};

double gini_impurity(size_t n_pos, size_t n_total);

}  // namespace granimpute
