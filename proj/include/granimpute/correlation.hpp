#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "granimpute/table.hpp"

namespace granimpute {

// Pearson correlation over the non-label feature columns, computed on
// pairwise-complete rows. Degenerate pairs (support < 2 or zero deviation)
// score 0 and are flagged rather than rejected.
struct CorrelationMatrix {
  std::vector<int> cols;        // table column ids covered, in table order
  std::vector<int> col_to_idx;  // table column id -> matrix index, -1 if absent
  int dim = 0;
  std::vector<double> rho;        // dim*dim, symmetric
  std::vector<int> support;       // complete-pair counts
  std::vector<uint8_t> degenerate;

  double rho_at(int idx_x, int idx_y) const { return rho[idx_x * dim + idx_y]; }
  int index_of(int table_col) const { return col_to_idx[table_col]; }
};

CorrelationMatrix correlation_matrix(const Table& t, const MaskMatrix& mask);

// The n_features columns most correlated (by |rho|) with the target column;
// ties broken toward the lower column index, scores non-increasing.
struct SemanticFeatureSet {
  int target_col = -1;
  std::vector<int> members;    // table column ids
  std::vector<double> scores;  // matching |rho|
  bool clamped = false;        // n_features exceeded d'-1
};

SemanticFeatureSet semantic_features(const CorrelationMatrix& corr,
                                     int target_col, int n_features);

// d' x d' CSV with feature names on both axes.
void write_correlation_csv(const CorrelationMatrix& corr, const Table& t,
                           std::ostream& out);

}  // namespace granimpute
