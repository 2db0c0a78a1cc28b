#include "granimpute/granule.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "granimpute/common.hpp"

namespace granimpute {

namespace {

bool row_complete(const MaskMatrix& mask, int row,
                  const std::vector<int>& cols) {
  for (int c : cols) {
    if (mask.is_missing(row, c)) return false;
  }
  return true;
}

}  // namespace

RowSelection select_rows(const Table& t, const MaskMatrix& mask, int seed_row,
                         const SemanticFeatureSet& features, int n_rows) {
  if (n_rows < 2) throw ConfigError("context row count must be >= 2");
  std::vector<int> required = features.members;
  required.push_back(features.target_col);

  RowSelection sel;
  const int n = static_cast<int>(t.n_rows());
  // Outward scan: distance 1, 2, ... with the earlier (lower-index) row
  // checked first on each distance tie.
  for (int dist = 1; dist < n; ++dist) {
    const int back = seed_row - dist;
    const int fwd = seed_row + dist;
    if (back < 0 && fwd >= n) break;
    if (back >= 0 && row_complete(mask, back, required)) {
      sel.rows.push_back(back);
      if (static_cast<int>(sel.rows.size()) == n_rows) return sel;
    }
    if (fwd < n && row_complete(mask, fwd, required)) {
      sel.rows.push_back(fwd);
      if (static_cast<int>(sel.rows.size()) == n_rows) return sel;
    }
  }
  sel.underfull = true;
  return sel;
}

Granule form_granule(const Table& t, const GranuleSpec& spec) {
  const int n = static_cast<int>(t.n_rows());
  std::set<int> seen;
  for (int r : spec.rows) {
    if (r < 0 || r >= n) throw std::logic_error("granule row out of range");
    if (r == spec.seed_row) throw std::logic_error("granule contains its seed row");
    if (!seen.insert(r).second) throw std::logic_error("granule repeats a row");
  }

  Granule g;
  g.spec = spec;
  g.n_rows = spec.rows.size();
  g.n_cols = spec.predictor_cols.size() + 1;
  g.block.reserve(g.n_rows * g.n_cols);
  for (int r : spec.rows) {
    for (int c : spec.predictor_cols) {
      if (t.is_missing(r, c)) throw std::logic_error("granule cell is missing");
      g.block.push_back(t.value(r, c));
    }
    if (t.is_missing(r, spec.target_col)) {
      throw std::logic_error("granule target cell is missing");
    }
    g.block.push_back(t.value(r, spec.target_col));
  }
  return g;
}

}  // namespace granimpute
