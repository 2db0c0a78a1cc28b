#include "granimpute/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "granimpute/common.hpp"

namespace granimpute {

bool Table::all_numeric() const {
  return std::all_of(columns.begin(), columns.end(), [](const Column& c) {
    return c.kind == FeatureKind::numeric;
  });
}

std::vector<int> Table::feature_cols() const {
  std::vector<int> out;
  out.reserve(columns.size());
  for (size_t c = 0; c < columns.size(); ++c) {
    if (!is_label(c)) out.push_back(static_cast<int>(c));
  }
  return out;
}

size_t Table::missing_count_col(size_t col) const {
  size_t n = 0;
  for (uint8_t m : columns[col].missing) n += m;
  return n;
}

size_t Table::missing_count_features() const {
  size_t n = 0;
  for (size_t c = 0; c < columns.size(); ++c) {
    if (!is_label(c)) n += missing_count_col(c);
  }
  return n;
}

double Table::column_mean(size_t col, double fallback) const {
  const Column& c = columns[col];
  double sum = 0.0;
  size_t n = 0;
  for (size_t r = 0; r < n_data_rows; ++r) {
    if (!c.missing[r]) {
      sum += c.values[r];
      ++n;
    }
  }
  return n == 0 ? fallback : sum / static_cast<double>(n);
}

std::optional<std::pair<double, double>> Table::column_range(size_t col) const {
  const Column& c = columns[col];
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  size_t n = 0;
  for (size_t r = 0; r < n_data_rows; ++r) {
    if (!c.missing[r]) {
      lo = std::min(lo, c.values[r]);
      hi = std::max(hi, c.values[r]);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return std::make_pair(lo, hi);
}

MaskMatrix build_mask(const Table& t) {
  MaskMatrix m;
  m.rows = t.n_rows();
  m.cols = t.n_cols();
  m.entries.assign(m.rows * m.cols, 1);
  for (size_t c = 0; c < m.cols; ++c) {
    const auto& missing = t.columns[c].missing;
    for (size_t r = 0; r < m.rows; ++r) {
      if (missing[r]) m.entries[c * m.rows + r] = 0;
    }
  }
  return m;
}

size_t MaskMatrix::zero_count() const {
  size_t n = 0;
  for (uint8_t e : entries) n += (e == 0);
  return n;
}

size_t MaskMatrix::zero_count_excluding(std::optional<int> skip_col) const {
  if (!skip_col) return zero_count();
  size_t n = 0;
  for (size_t c = 0; c < cols; ++c) {
    if (static_cast<int>(c) == *skip_col) continue;
    for (size_t r = 0; r < rows; ++r) n += (entries[c * rows + r] == 0);
  }
  return n;
}

std::pair<Table, CategoryMap> encode_categoricals(const Table& t) {
  Table out = t;
  CategoryMap map;
  for (size_t c = 0; c < out.columns.size(); ++c) {
    Column& col = out.columns[c];
    if (col.kind != FeatureKind::categorical) continue;

    std::map<std::string, double> code_of;  // ordered => lexicographic
    for (size_t r = 0; r < out.n_data_rows; ++r) {
      if (!col.missing[r]) code_of.emplace(col.tokens[r], 0.0);
    }
    CategoryCoding coding;
    coding.col = static_cast<int>(c);
    const double n_categories = static_cast<double>(code_of.size());
    size_t i = 0;
    for (auto& [token, code] : code_of) {
      code = static_cast<double>(i + 1) / n_categories;
      coding.categories.push_back(token);
      coding.codes.push_back(code);
      ++i;
    }

    col.values.assign(out.n_data_rows,
                      std::numeric_limits<double>::quiet_NaN());
    for (size_t r = 0; r < out.n_data_rows; ++r) {
      if (!col.missing[r]) col.values[r] = code_of.at(col.tokens[r]);
    }
    col.tokens.clear();
    col.kind = FeatureKind::numeric;
    map.codings.push_back(std::move(coding));
  }
  return {std::move(out), std::move(map)};
}

namespace {

// Mean and population (1/N) deviation over the non-missing entries.
std::pair<double, double> column_moments(const Column& col, size_t n_rows) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t r = 0; r < n_rows; ++r) {
    if (!col.missing[r]) {
      sum += col.values[r];
      ++n;
    }
  }
  if (n == 0) return {0.0, 0.0};
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (size_t r = 0; r < n_rows; ++r) {
    if (!col.missing[r]) {
      const double d = col.values[r] - mean;
      ss += d * d;
    }
  }
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

}  // namespace

std::pair<Table, StandardizationParams> standardize(const Table& t) {
  if (!t.all_numeric()) {
    throw DataError("standardize requires an all-numeric table");
  }
  Table out = t;
  StandardizationParams params;
  params.per_col.resize(t.n_cols());
  for (size_t c = 0; c < t.n_cols(); ++c) {
    if (t.is_label(c)) continue;
    Column& col = out.columns[c];
    const auto [mean, sd] = column_moments(col, out.n_data_rows);
    params.per_col[c] = {true, mean, sd};
    for (size_t r = 0; r < out.n_data_rows; ++r) {
      if (col.missing[r]) continue;
      col.values[r] = sd > 0.0 ? (col.values[r] - mean) / sd : 0.0;
    }
  }
  return {std::move(out), std::move(params)};
}

Table inverse_standardize(const Table& t, const StandardizationParams& p) {
  if (p.per_col.size() != t.n_cols()) {
    throw DataError("standardization params do not match table shape");
  }
  Table out = t;
  for (size_t c = 0; c < t.n_cols(); ++c) {
    const ColumnStats& s = p.per_col[c];
    if (!s.standardized) continue;
    Column& col = out.columns[c];
    for (size_t r = 0; r < out.n_data_rows; ++r) {
      if (col.missing[r]) continue;
      col.values[r] = s.stddev > 0.0 ? col.values[r] * s.stddev + s.mean
                                     : s.mean;
    }
  }
  return out;
}

}  // namespace granimpute
