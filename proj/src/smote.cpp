#include "granimpute/smote.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "granimpute/common.hpp"
#include "granimpute/rng.hpp"

namespace granimpute {

SmoteResult smote(const std::vector<std::vector<double>>& minority_rows,
                  int k_neighbors, int n_needed, uint64_t seed) {
  if (k_neighbors < 1) throw ConfigError("neighbor count must be >= 1");
  SmoteResult out;
  if (n_needed <= 0 || minority_rows.empty()) return out;

  const int m = static_cast<int>(minority_rows.size());
  if (m < 2) {
    // A single minority row has no neighbor to interpolate toward.
    out.duplicated_fallback = true;
    log_warn("smote_duplication", "minority_rows=1");
    for (int i = 0; i < n_needed; ++i) {
      out.rows.push_back(minority_rows[0]);
      out.provenance.push_back({0, 0, 0.0});
    }
    return out;
  }

  const int k = std::min(k_neighbors, m - 1);
  std::vector<std::vector<int>> neighbors(m);
  std::vector<std::pair<double, int>> dist(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (size_t c = 0; c < minority_rows[i].size(); ++c) {
        const double d = minority_rows[i][c] - minority_rows[j][c];
        s += d * d;
      }
      dist[j] = {i == j ? std::numeric_limits<double>::infinity() : s, j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    neighbors[i].reserve(k);
    for (int t = 0; t < k; ++t) neighbors[i].push_back(dist[t].second);
  }

  Rng rng(seed);
  out.rows.reserve(n_needed);
  for (int i = 0; i < n_needed; ++i) {
    const int base = i % m;
    const int neighbor = neighbors[base][rng.below(k)];
    const double u = rng.uniform();
    std::vector<double> row(minority_rows[base].size());
    for (size_t c = 0; c < row.size(); ++c) {
      row[c] = minority_rows[base][c] +
               u * (minority_rows[neighbor][c] - minority_rows[base][c]);
    }
    out.rows.push_back(std::move(row));
    out.provenance.push_back({base, neighbor, u});
  }
  return out;
}

}  // namespace granimpute
