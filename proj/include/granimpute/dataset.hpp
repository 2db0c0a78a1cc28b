#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace granimpute {

// Dense row-major feature matrix with binary labels, the working format of
// the classification stage.
struct Dataset {
  size_t n_rows = 0;
  size_t n_cols = 0;
  std::vector<double> x;  // n_rows * n_cols
  std::vector<int> y;     // 0/1

  double at(size_t r, size_t c) const { return x[r * n_cols + c]; }
  std::span<const double> row(size_t r) const {
    return {x.data() + r * n_cols, n_cols};
  }
  void push_row(std::span<const double> row, int label) {
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(label);
    ++n_rows;
  }
};

}  // namespace granimpute
