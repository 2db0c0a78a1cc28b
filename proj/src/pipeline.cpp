#include "granimpute/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "granimpute/common.hpp"
#include "granimpute/rng.hpp"
#include "granimpute/smote.hpp"

namespace granimpute {

Dataset dataset_from_table(const Table& t) {
  if (!t.all_numeric()) throw DataError("table must be all-numeric");
  if (!t.label_col) throw DataError("table has no label column");
  const int label = *t.label_col;

  std::set<double> label_values;
  for (size_t r = 0; r < t.n_rows(); ++r) {
    if (t.is_missing(r, label)) throw DataError("label column has missing cells");
    label_values.insert(t.value(r, label));
  }
  if (label_values.size() != 2) {
    throw DataError("label column must carry exactly two values, found " +
                    std::to_string(label_values.size()));
  }
  const double positive = *label_values.rbegin();

  const std::vector<int> feats = t.feature_cols();
  Dataset data;
  data.n_cols = feats.size();
  data.x.reserve(t.n_rows() * feats.size());
  for (size_t r = 0; r < t.n_rows(); ++r) {
    for (int c : feats) {
      if (t.is_missing(r, c)) {
        throw DataError("feature cells must be complete (impute first)");
      }
      data.x.push_back(t.value(r, c));
    }
    data.y.push_back(t.value(r, label) == positive ? 1 : 0);
    ++data.n_rows;
  }
  return data;
}

FeatureImportance rf_feature_select(const Dataset& data, int n_trees, int k,
                                    uint64_t seed) {
  if (k < 1) throw ConfigError("selected feature count must be >= 1");
  RandomForest forest;
  RandomForest::Params params;
  params.n_trees = n_trees;
  forest.fit(data, params, seed);

  FeatureImportance out;
  out.importances = forest.importances();

  std::vector<int> order(data.n_cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return out.importances[a] > out.importances[b];
  });
  const size_t keep = std::min<size_t>(k, data.n_cols);
  out.selected.assign(order.begin(), order.begin() + keep);
  return out;
}

std::pair<std::vector<size_t>, std::vector<size_t>> stratified_split(
    const std::vector<int>& labels, double test_fraction, uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError("test fraction must lie in [0, 1)");
  }
  std::vector<size_t> pool[2];
  for (size_t i = 0; i < labels.size(); ++i) {
    pool[labels[i] == 1 ? 1 : 0].push_back(i);
  }

  std::vector<size_t> train, test;
  for (int cls = 0; cls < 2; ++cls) {
    auto& rows = pool[cls];
    if (rows.empty()) continue;
    Rng rng(mix_seed(seed, static_cast<uint64_t>(cls)));
    rng.shuffle(rows);
    size_t n_test = static_cast<size_t>(
        std::llround(test_fraction * static_cast<double>(rows.size())));
    // Never strand a whole class in the test fold.
    if (n_test == rows.size()) n_test = rows.size() - 1;
    test.insert(test.end(), rows.begin(), rows.begin() + n_test);
    train.insert(train.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

namespace {

Dataset project_rows(const Dataset& data, const std::vector<size_t>& rows,
                     const std::vector<int>& features) {
  Dataset out;
  out.n_cols = features.size();
  out.x.reserve(rows.size() * features.size());
  for (size_t r : rows) {
    for (int f : features) out.x.push_back(data.at(r, f));
    out.y.push_back(data.y[r]);
    ++out.n_rows;
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const Table& raw, const PipelineConfig& config) {
  if (config.classifiers.empty()) {
    throw ConfigError("at least one classifier must be configured");
  }

  auto [encoded, category_map] = encode_categoricals(raw);
  (void)category_map;
  const ImputedTable filled = impute_table(encoded, config.impute);
  log_info("impute_done",
           "cells=" + std::to_string(filled.provenance.size()));
  auto [scaled, scale_params] = standardize(filled.table);
  (void)scale_params;
  const Dataset full = dataset_from_table(scaled);

  PipelineResult result;
  result.importance = rf_feature_select(full, config.rf_select_trees,
                                        config.k_features,
                                        mix_seed(config.seed, "select"));
  const std::vector<int> table_feats = scaled.feature_cols();
  for (int f : result.importance.selected) {
    result.selected_table_cols.push_back(table_feats[f]);
  }
  log_info("features_selected",
           "kept=" + std::to_string(result.importance.selected.size()) +
               " of=" + std::to_string(full.n_cols));

  const auto [train_rows, test_rows] =
      stratified_split(full.y, config.test_fraction, mix_seed(config.seed, "split"));
  Dataset train = project_rows(full, train_rows, result.importance.selected);
  const Dataset test = project_rows(full, test_rows, result.importance.selected);
  result.train_rows = train.n_rows;
  result.test_rows = test.n_rows;

  size_t n_pos = 0;
  for (int y : train.y) n_pos += y;
  const size_t n_neg = train.n_rows - n_pos;
  const int minority_label = n_pos < n_neg ? 1 : 0;
  const size_t n_minority = std::min(n_pos, n_neg);
  const size_t n_majority = std::max(n_pos, n_neg);

  if (n_minority > 0 && n_majority > n_minority) {
    std::vector<std::vector<double>> minority;
    minority.reserve(n_minority);
    for (size_t r = 0; r < train.n_rows; ++r) {
      if (train.y[r] == minority_label) {
        const auto row = train.row(r);
        minority.emplace_back(row.begin(), row.end());
      }
    }
    const SmoteResult synth =
        smote(minority, config.smote_k,
              static_cast<int>(n_majority - n_minority),
              mix_seed(config.seed, "smote"));
    for (const auto& row : synth.rows) {
      train.push_row(row, minority_label);
    }
    result.synthetic_rows = synth.rows.size();
    log_info("train_balanced",
             "synthetic=" + std::to_string(result.synthetic_rows) +
                 " minority_label=" + std::to_string(minority_label));
  }

  for (const std::string& kind : config.classifiers) {
    const auto model =
        train_classifier(kind, train, mix_seed(config.seed, kind));
    result.reports.push_back(evaluate(*model, test));
    const EvalReport& rep = result.reports.back();
    log_info("classifier_done",
             "kind=" + kind + " accuracy=" + format_double(rep.accuracy) +
                 " auc=" + format_double(rep.auc));
  }
  return result;
}

}  // namespace granimpute
