#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "granimpute/granule.hpp"

namespace granimpute {

// Local least-squares model for one granule: target ~ predictors + intercept.
struct LocalModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  bool regularized = false;  // ridge engaged for a rank-deficient block
};

// Fits by normal equations on the centered block. When the Gram matrix is
// numerically singular, or the block has fewer than predictors + 2 rows, a
// Tikhonov ridge of 1e-8 * trace(X'X) / n_predictors is added and the model
// is flagged.
LocalModel fit_local(const Granule& g);

double estimate_cell(const Table& t, const GranuleSpec& spec,
                     const LocalModel& model);

enum class FallbackKind : uint8_t { none, column_mean, empty_column };
std::string_view fallback_name(FallbackKind k);

struct CellProvenance {
  int row = -1;
  int col = -1;
  double value = 0.0;
  FallbackKind fallback = FallbackKind::none;
  bool regularized = false;
  std::vector<int> predictor_cols;
  std::vector<int> rows;
};

struct ImputeOptions {
  int n_predictors = 5;    // granule feature count (CLI --delta)
  int n_context_rows = 7;  // granule row count (CLI --eta)
  int granule_budget = 64; // n_predictors * n_context_rows must stay within
};

// Imputes one missing cell: ranks candidate predictors by |rho|, drops any
// that are missing at the seed row (replacing them with the next-ranked
// candidate, shrinking the set if the pool runs out), selects context rows,
// fits, estimates. Falls back to the column mean when no usable predictors
// or too few complete rows remain; every degradation lands in provenance.
CellProvenance impute_cell(const Table& t, const MaskMatrix& mask,
                           const CorrelationMatrix& corr, int row, int col,
                           const ImputeOptions& opts);

struct ImputedTable {
  Table table;
  std::vector<CellProvenance> provenance;
};

// Fills every missing feature cell. All estimates are computed against the
// original table and mask (imputed values never feed later granules), so the
// result is independent of processing order. The label column is untouched.
ImputedTable impute_table(const Table& t, const ImputeOptions& opts = {});
ImputedTable impute_table(const Table& t, const MaskMatrix& mask,
                          const CorrelationMatrix& corr,
                          const ImputeOptions& opts);

// JSON-lines audit dumps.
void write_provenance_jsonl(const ImputedTable& it, const Table& source,
                            std::ostream& out);
void write_granules_jsonl(const ImputedTable& it, std::ostream& out);

}  // namespace granimpute
