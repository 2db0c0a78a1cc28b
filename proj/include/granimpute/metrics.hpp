#pragma once

#include <array>
#include <string>
#include <vector>

#include "granimpute/classifiers.hpp"
#include "granimpute/dataset.hpp"

namespace granimpute {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

struct EvalReport {
  std::string classifier;
  double accuracy = 0.0;
  Confusion confusion;                       // at threshold 0.5
  std::vector<std::array<double, 2>> roc;    // (fpr, tpr), one per threshold
  double auc = 0.0;                          // trapezoidal
  double recall_pos = 0.0;
  double recall_neg = 0.0;
};

// ROC by sweeping thresholds over the distinct scores (descending), AUC by
// the trapezoidal rule; with ties grouped this equals Mann-Whitney with ties
// counted half. Scores >= 0.5 predict the positive class.
EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels,
                           const std::string& classifier_name);

EvalReport evaluate(const Classifier& model, const Dataset& test);

}  // namespace granimpute
