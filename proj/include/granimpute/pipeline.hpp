#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "granimpute/classifiers.hpp"
#include "granimpute/dataset.hpp"
#include "granimpute/imputer.hpp"
#include "granimpute/metrics.hpp"
#include "granimpute/table.hpp"

namespace granimpute {

// Impurity-decrease ranking from a random forest trained on the complete
// table; `selected` holds the top-k feature positions, importance-descending.
struct FeatureImportance {
  std::vector<double> importances;  // normalized to sum 1
  std::vector<int> selected;
};

FeatureImportance rf_feature_select(const Dataset& data, int n_trees, int k,
                                    uint64_t seed);

// Per class: shuffle, hold out test_fraction. Returned index lists are
// sorted ascending.
std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const std::vector<int>& labels, double test_fraction, uint64_t seed);

struct PipelineConfig {
  std::vector<std::string> classifiers;
  int k_features = 16;
  int rf_select_trees = 200;
  uint64_t seed = 42;
  ImputeOptions impute;
  double test_fraction = 0.2;
  int smote_k = 5;
};

struct PipelineResult {
  std::vector<EvalReport> reports;        // one per configured classifier
  FeatureImportance importance;
  std::vector<int> selected_table_cols;   // table column ids of kept features
  size_t train_rows = 0;
  size_t test_rows = 0;
  size_t synthetic_rows = 0;
};

// encode -> granular impute -> standardize -> forest feature selection ->
// stratified 80/20 split -> SMOTE on the training fold only -> train and
// evaluate each configured classifier on the untouched test fold.
PipelineResult run_pipeline(const Table& raw, const PipelineConfig& config);

// Feature matrix + binary labels from an all-numeric table; the greater of
// the two label values is the positive class.
Dataset dataset_from_table(const Table& t);

}  // namespace granimpute
