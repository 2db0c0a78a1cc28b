#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "granimpute/imputer.hpp"
#include "granimpute/table.hpp"

namespace granimpute {

// MCAR masking plan: cells drawn uniformly without replacement from the
// originally non-missing feature cells (label column excluded).
struct MaskingPlan {
  double rate = 0.0;
  uint64_t seed = 0;
  std::vector<std::pair<int, int>> cells;  // (row, col)
};

MaskingPlan make_masking_plan(const Table& t, double rate, uint64_t seed);

struct MaskedTable {
  Table table;
  std::vector<double> truths;  // parallel to plan.cells
};

MaskedTable apply_mask(const Table& t, const MaskingPlan& plan);

// Normalized error |truth - pred| / (max - min) over the column's observed
// range. A zero range degenerates to 0 on an exact match and 1 otherwise.
double error_metric(double truth, double pred, double col_min, double col_max,
                    bool* range_degenerate = nullptr);
double error_metric(double truth, double pred, const Table& t, int col,
                    bool* range_degenerate = nullptr);

// Baseline imputers. All read observed values only, never already-imputed
// ones, so they are order-independent like the granular imputer.
ImputedTable mean_impute(const Table& t);

// Each missing cell takes the mean of its column over the k nearest donor
// rows. Distance is the RMS of range-normalized differences over mutually
// non-missing features; rows sharing no features sit at infinity. Donors
// must hold a value in the target column; ties break toward the lower row
// index. No donor at all degrades to the column mean.
ImputedTable knn_impute(const Table& t, int k);

// Chained-equations pass: missing cells start at column means, then each
// incomplete column is repeatedly re-imputed from a ridge regression on all
// other feature columns.
ImputedTable mice_lite_impute(const Table& t, int sweeps = 5);

struct BaselineOptions {
  int knn_k = 5;
  int mice_sweeps = 5;
};

// One masking/imputation/scoring experiment cell.
struct SweepReport {
  double rate = 0.0;
  std::string imputer;
  size_t n_cells = 0;
  double mean_err = 0.0;
  double median_err = 0.0;
  double p90_err = 0.0;
  std::vector<double> errors;  // per-cell distribution
};

// Crosses rates x imputers (imputer names: gs, mean, knn, mice); combination
// i gets seed + i so parallel evaluation cannot change results.
std::vector<SweepReport> impurity_sweep(const Table& t,
                                        const std::vector<double>& rates,
                                        const std::vector<std::string>& imputers,
                                        uint64_t seed,
                                        const ImputeOptions& impute_opts = {},
                                        const BaselineOptions& baseline_opts = {});

double mean_of(const std::vector<double>& v);
double median_of(std::vector<double> v);
double percentile90_of(std::vector<double> v);

}  // namespace granimpute
