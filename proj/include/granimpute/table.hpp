#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace granimpute {

enum class FeatureKind { numeric, categorical };

// One feature column. Numeric payload lives in `values`, categorical payload
// in `tokens`; entries are only meaningful where `missing` is 0.
struct Column {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<double> values;
  std::vector<std::string> tokens;
  std::vector<uint8_t> missing;
};

// Column-oriented N x d table with explicit missing markers. Immutable by
// convention once built; transforms return fresh tables.
struct Table {
  std::vector<Column> columns;
  std::optional<int> label_col;
  size_t n_data_rows = 0;

  size_t n_rows() const { return n_data_rows; }
  size_t n_cols() const { return columns.size(); }

  bool is_missing(size_t row, size_t col) const {
    return columns[col].missing[row] != 0;
  }
  double value(size_t row, size_t col) const { return columns[col].values[row]; }

  bool is_label(size_t col) const {
    return label_col && static_cast<size_t>(*label_col) == col;
  }
  bool all_numeric() const;

  // Feature columns = every column except the label.
  std::vector<int> feature_cols() const;

  size_t missing_count_features() const;
  size_t missing_count_col(size_t col) const;

  // Mean over the non-missing entries; `fallback` when the column is empty.
  double column_mean(size_t col, double fallback = 0.0) const;
  // (min, max) over non-missing entries; nullopt when the column is empty.
  std::optional<std::pair<double, double>> column_range(size_t col) const;
};

// 0/1 missingness indicator, same shape as its source table; 0 = missing.
struct MaskMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<uint8_t> entries;  // column-major

  uint8_t at(size_t row, size_t col) const { return entries[col * rows + row]; }
  bool is_missing(size_t row, size_t col) const { return at(row, col) == 0; }
  size_t zero_count() const;
  size_t zero_count_excluding(std::optional<int> skip_col) const;
};

MaskMatrix build_mask(const Table& t);

// Numeric codes assigned to one categorical column: categories in
// lexicographic order, codes 1/C, 2/C, ..., 1.
struct CategoryCoding {
  int col = -1;
  std::vector<std::string> categories;
  std::vector<double> codes;
};

struct CategoryMap {
  std::vector<CategoryCoding> codings;
};

// Replaces every categorical column (label included) by its numeric codes.
// Missing cells stay missing; the result is all-numeric.
std::pair<Table, CategoryMap> encode_categoricals(const Table& t);

struct ColumnStats {
  bool standardized = false;  // false for the label column
  double mean = 0.0;
  double stddev = 0.0;  // population (1/N) standard deviation
};

struct StandardizationParams {
  std::vector<ColumnStats> per_col;
};

// Maps every non-missing cell of each feature column to (x - mean) / stddev,
// with the statistics taken over that column's non-missing entries. Columns
// with zero deviation map to 0. The label column is left untouched.
std::pair<Table, StandardizationParams> standardize(const Table& t);

Table inverse_standardize(const Table& t, const StandardizationParams& p);

}  // namespace granimpute
