#include "granimpute/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "granimpute/common.hpp"

namespace granimpute {

CorrelationMatrix correlation_matrix(const Table& t, const MaskMatrix& mask) {
  if (!t.all_numeric()) {
    throw DataError("correlation requires an all-numeric table");
  }
  CorrelationMatrix m;
  m.cols = t.feature_cols();
  m.dim = static_cast<int>(m.cols.size());
  m.col_to_idx.assign(t.n_cols(), -1);
  for (int i = 0; i < m.dim; ++i) m.col_to_idx[m.cols[i]] = i;
  m.rho.assign(static_cast<size_t>(m.dim) * m.dim, 0.0);
  m.support.assign(static_cast<size_t>(m.dim) * m.dim, 0);
  m.degenerate.assign(static_cast<size_t>(m.dim) * m.dim, 0);

  const size_t n = t.n_rows();
  for (int a = 0; a < m.dim; ++a) {
    for (int b = a; b < m.dim; ++b) {
      const int ca = m.cols[a];
      const int cb = m.cols[b];
      const auto& xa = t.columns[ca].values;
      const auto& xb = t.columns[cb].values;

      // Two passes over the pairwise-complete rows: means first, then
      // centered moments, to avoid the cancellation of raw-moment formulas.
      double sx = 0.0, sy = 0.0;
      int support = 0;
      for (size_t r = 0; r < n; ++r) {
        if (mask.is_missing(r, ca) || mask.is_missing(r, cb)) continue;
        sx += xa[r];
        sy += xb[r];
        ++support;
      }
      double rho = 0.0;
      bool degenerate = true;
      if (support >= 2) {
        const double mx = sx / support;
        const double my = sy / support;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (size_t r = 0; r < n; ++r) {
          if (mask.is_missing(r, ca) || mask.is_missing(r, cb)) continue;
          const double dx = xa[r] - mx;
          const double dy = xb[r] - my;
          sxx += dx * dx;
          syy += dy * dy;
          sxy += dx * dy;
        }
        if (sxx > 0.0 && syy > 0.0) {
          rho = a == b ? 1.0 : sxy / std::sqrt(sxx * syy);
          degenerate = false;
        }
      }
      const size_t ij = static_cast<size_t>(a) * m.dim + b;
      const size_t ji = static_cast<size_t>(b) * m.dim + a;
      m.rho[ij] = m.rho[ji] = rho;
      m.support[ij] = m.support[ji] = support;
      m.degenerate[ij] = m.degenerate[ji] = degenerate ? 1 : 0;
    }
  }
  return m;
}

SemanticFeatureSet semantic_features(const CorrelationMatrix& corr,
                                     int target_col, int n_features) {
  if (n_features < 1) throw ConfigError("semantic feature count must be >= 1");
  const int b = corr.index_of(target_col);
  if (b < 0) throw ConfigError("target column is not part of the correlation matrix");

  SemanticFeatureSet set;
  set.target_col = target_col;
  if (n_features > corr.dim - 1) {
    set.clamped = true;
    log_warn("semantic_features_clamped",
             "requested=" + std::to_string(n_features) +
                 " available=" + std::to_string(corr.dim - 1));
    n_features = corr.dim - 1;
  }

  std::vector<int> order;
  order.reserve(corr.dim - 1);
  for (int i = 0; i < corr.dim; ++i) {
    if (i != b) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    const double sl = std::fabs(corr.rho_at(b, lhs));
    const double sr = std::fabs(corr.rho_at(b, rhs));
    if (sl != sr) return sl > sr;
    return corr.cols[lhs] < corr.cols[rhs];
  });
  order.resize(static_cast<size_t>(n_features));
  for (int i : order) {
    set.members.push_back(corr.cols[i]);
    set.scores.push_back(std::fabs(corr.rho_at(b, i)));
  }
  return set;
}

void write_correlation_csv(const CorrelationMatrix& corr, const Table& t,
                           std::ostream& out) {
  out << "feature";
  for (int c : corr.cols) out << ',' << t.columns[c].name;
  out << '\n';
  for (int a = 0; a < corr.dim; ++a) {
    out << t.columns[corr.cols[a]].name;
    for (int b = 0; b < corr.dim; ++b) {
      out << ',' << format_double(corr.rho_at(a, b));
    }
    out << '\n';
  }
}

}  // namespace granimpute
