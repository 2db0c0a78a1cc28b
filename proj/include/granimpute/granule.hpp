#pragma once

#include <vector>

#include "granimpute/correlation.hpp"
#include "granimpute/table.hpp"

namespace granimpute {

// The block addressed around one missing cell: the seed cell, the predictor
// columns, and the context rows that are complete on predictors + target.
struct GranuleSpec {
  int seed_row = -1;
  int target_col = -1;
  std::vector<int> predictor_cols;
  std::vector<int> rows;
};

// Materialized rows x (predictors + target) values; never contains a missing
// cell.
struct Granule {
  GranuleSpec spec;
  size_t n_rows = 0;
  size_t n_cols = 0;  // predictor count + 1, target last
  std::vector<double> block;  // row-major

  double at(size_t r, size_t c) const { return block[r * n_cols + c]; }
};

struct RowSelection {
  std::vector<int> rows;  // ordered by distance from the seed row
  bool underfull = false; // fewer than n_rows complete rows exist
};

// Picks the n_rows rows nearest to seed_row that are complete on
// features.members plus the target, scanning outward in row distance and
// preferring the earlier row when two rows tie.
RowSelection select_rows(const Table& t, const MaskMatrix& mask, int seed_row,
                         const SemanticFeatureSet& features, int n_rows);

// Materializes the block; throws std::logic_error if the spec addresses a
// missing cell or repeats a row (an internal invariant breach, never user
// input).
Granule form_granule(const Table& t, const GranuleSpec& spec);

}  // namespace granimpute
