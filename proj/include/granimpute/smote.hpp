#pragma once

#include <cstdint>
#include <vector>

namespace granimpute {

// Synthetic minority rows: base + u * (neighbor - base) with u uniform in
// [0,1] and the neighbor drawn uniformly among the base's k nearest minority
// rows. Bases cycle through the minority set so generation is deterministic
// per seed. Provenance records every (base, neighbor, u) for audit and
// leakage tests.
struct SmoteResult {
  struct Provenance {
    int base = -1;
    int neighbor = -1;
    double u = 0.0;
  };
  std::vector<std::vector<double>> rows;
  std::vector<Provenance> provenance;
  bool duplicated_fallback = false;  // minority < 2: plain duplication
};

SmoteResult smote(const std::vector<std::vector<double>>& minority_rows,
                  int k_neighbors, int n_needed, uint64_t seed);

}  // namespace granimpute
