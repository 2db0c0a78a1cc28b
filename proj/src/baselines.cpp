#include "granimpute/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "granimpute/common.hpp"
#include "granimpute/rng.hpp"

namespace granimpute {

MaskingPlan make_masking_plan(const Table& t, double rate, uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("masking rate must lie in [0, 1)");
  }
  std::vector<std::pair<int, int>> eligible;
  for (size_t c = 0; c < t.n_cols(); ++c) {
    if (t.is_label(c)) continue;
    const Column& col = t.columns[c];
    for (size_t r = 0; r < t.n_rows(); ++r) {
      if (!col.missing[r]) eligible.emplace_back(static_cast<int>(r),
                                                 static_cast<int>(c));
    }
  }

  MaskingPlan plan;
  plan.rate = rate;
  plan.seed = seed;
  const size_t n_mask = static_cast<size_t>(
      std::llround(rate * static_cast<double>(eligible.size())));
  if (n_mask == 0) return plan;

  // Partial Fisher-Yates: the first n_mask slots are a uniform sample.
  Rng rng(seed);
  for (size_t i = 0; i < n_mask; ++i) {
    const size_t j = i + rng.below(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  plan.cells.assign(eligible.begin(), eligible.begin() + n_mask);
  return plan;
}

MaskedTable apply_mask(const Table& t, const MaskingPlan& plan) {
  MaskedTable out;
  out.table = t;
  out.truths.reserve(plan.cells.size());
  for (const auto& [r, c] : plan.cells) {
    Column& col = out.table.columns[c];
    if (col.missing[r]) throw ConfigError("masking plan hits a missing cell");
    out.truths.push_back(col.values[r]);
    col.values[r] = 0.0;
    col.missing[r] = 1;
  }
  return out;
}

double error_metric(double truth, double pred, double col_min, double col_max,
                    bool* range_degenerate) {
  const double range = col_max - col_min;
  if (!(range > 0.0)) {
    if (range_degenerate) *range_degenerate = true;
    return truth == pred ? 0.0 : 1.0;
  }
  if (range_degenerate) *range_degenerate = false;
  return std::abs(truth - pred) / range;
}

double error_metric(double truth, double pred, const Table& t, int col,
                    bool* range_degenerate) {
  const auto range = t.column_range(col);
  if (!range) {
    if (range_degenerate) *range_degenerate = true;
    return truth == pred ? 0.0 : 1.0;
  }
  return error_metric(truth, pred, range->first, range->second,
                      range_degenerate);
}

ImputedTable mean_impute(const Table& t) {
  ImputedTable out;
  out.table = t;
  for (size_t c = 0; c < t.n_cols(); ++c) {
    if (t.is_label(c)) continue;
    Column& col = out.table.columns[c];
    bool any = false;
    double sum = 0.0;
    size_t n = 0;
    for (size_t r = 0; r < t.n_rows(); ++r) {
      if (!col.missing[r]) {
        sum += col.values[r];
        ++n;
        any = true;
      }
    }
    const double fill = any ? sum / static_cast<double>(n) : 0.0;
    for (size_t r = 0; r < t.n_rows(); ++r) {
      if (col.missing[r]) {
        CellProvenance p;
        p.row = static_cast<int>(r);
        p.col = static_cast<int>(c);
        p.value = fill;
        p.fallback = any ? FallbackKind::column_mean : FallbackKind::empty_column;
        col.values[r] = fill;
        col.missing[r] = 0;
        out.provenance.push_back(std::move(p));
      }
    }
  }
  return out;
}

namespace {

struct ColumnRangeCache {
  std::vector<double> inv_range;  // 0 for degenerate columns

  explicit ColumnRangeCache(const Table& t) {
    inv_range.assign(t.n_cols(), 0.0);
    for (size_t c = 0; c < t.n_cols(); ++c) {
      if (t.is_label(c)) continue;
      const auto r = t.column_range(c);
      if (r && r->second - r->first > 0.0) {
        inv_range[c] = 1.0 / (r->second - r->first);
      }
    }
  }
};

double donor_distance(const Table& t, const ColumnRangeCache& ranges, int a,
                      int b) {
  double sum = 0.0;
  int n = 0;
  for (size_t c = 0; c < t.n_cols(); ++c) {
    if (t.is_label(c)) continue;
    const Column& col = t.columns[c];
    if (col.missing[a] || col.missing[b]) continue;
    const double d = (col.values[a] - col.values[b]) * ranges.inv_range[c];
    sum += d * d;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace

ImputedTable knn_impute(const Table& t, int k) {
  if (k < 1) throw ConfigError("donor count must be >= 1");
  const ColumnRangeCache ranges(t);
  const int n = static_cast<int>(t.n_rows());

  ImputedTable out;
  out.table = t;

  std::vector<std::pair<double, int>> order(n);  // (distance, row)
  for (int r = 0; r < n; ++r) {
    bool row_has_gap = false;
    for (size_t c = 0; c < t.n_cols(); ++c) {
      if (!t.is_label(c) && t.columns[c].missing[r]) {
        row_has_gap = true;
        break;
      }
    }
    if (!row_has_gap) continue;

    for (int d = 0; d < n; ++d) {
      order[d] = {d == r ? std::numeric_limits<double>::infinity()
                         : donor_distance(t, ranges, r, d),
                  d};
    }
    std::sort(order.begin(), order.end());

    for (size_t c = 0; c < t.n_cols(); ++c) {
      if (t.is_label(c) || !t.columns[c].missing[r]) continue;
      double sum = 0.0;
      int taken = 0;
      for (const auto& [dist, donor] : order) {
        if (std::isinf(dist)) break;
        if (t.columns[c].missing[donor]) continue;
        sum += t.columns[c].values[donor];
        if (++taken == k) break;
      }
      CellProvenance p;
      p.row = r;
      p.col = static_cast<int>(c);
      if (taken > 0) {
        p.value = sum / taken;
        p.fallback = FallbackKind::none;
      } else {
        bool any = false;
        double csum = 0.0;
        size_t cn = 0;
        for (int rr = 0; rr < n; ++rr) {
          if (!t.columns[c].missing[rr]) {
            csum += t.columns[c].values[rr];
            ++cn;
            any = true;
          }
        }
        p.value = any ? csum / static_cast<double>(cn) : 0.0;
        p.fallback = any ? FallbackKind::column_mean : FallbackKind::empty_column;
      }
      out.table.columns[c].values[r] = p.value;
      out.table.columns[c].missing[r] = 0;
      out.provenance.push_back(std::move(p));
    }
  }
  return out;
}

ImputedTable mice_lite_impute(const Table& t, int sweeps) {
  if (sweeps < 1) throw ConfigError("sweep count must be >= 1");
  if (!t.all_numeric()) {
    throw DataError("imputation requires an all-numeric table (encode first)");
  }
  const std::vector<int> features = t.feature_cols();
  const int n = static_cast<int>(t.n_rows());
  const int d = static_cast<int>(features.size());

  // Working copy starts at column means; empty columns stay at zero.
  Eigen::MatrixXd x(n, d);
  std::vector<std::vector<int>> gaps(d);
  for (int j = 0; j < d; ++j) {
    const Column& col = t.columns[features[j]];
    double sum = 0.0;
    size_t cnt = 0;
    for (int r = 0; r < n; ++r) {
      if (!col.missing[r]) {
        sum += col.values[r];
        ++cnt;
      }
    }
    const double fill = cnt ? sum / static_cast<double>(cnt) : 0.0;
    for (int r = 0; r < n; ++r) {
      if (col.missing[r]) {
        gaps[j].push_back(r);
        x(r, j) = fill;
      } else {
        x(r, j) = col.values[r];
      }
    }
  }

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int j = 0; j < d; ++j) {
      if (gaps[j].empty()) continue;
      const Column& col = t.columns[features[j]];

      std::vector<int> obs;
      obs.reserve(n);
      for (int r = 0; r < n; ++r) {
        if (!col.missing[r]) obs.push_back(r);
      }
      if (obs.empty() || d < 2) continue;

      Eigen::MatrixXd a(obs.size(), d);  // other columns + intercept
      Eigen::VectorXd y(obs.size());
      for (size_t i = 0; i < obs.size(); ++i) {
        int k = 0;
        for (int jj = 0; jj < d; ++jj) {
          if (jj == j) continue;
          a(static_cast<int>(i), k++) = x(obs[i], jj);
        }
        a(static_cast<int>(i), d - 1) = 1.0;
        y(static_cast<int>(i)) = x(obs[i], j);
      }

      Eigen::MatrixXd gram = a.transpose() * a;
      const double lambda =
          std::max(1e-6 * gram.trace() / static_cast<double>(d), 1e-12);
      gram.diagonal().array() += lambda;
      const Eigen::VectorXd theta =
          Eigen::LDLT<Eigen::MatrixXd>(gram).solve(a.transpose() * y);
      if (!theta.allFinite()) continue;

      for (int r : gaps[j]) {
        double v = theta(d - 1);
        int k = 0;
        for (int jj = 0; jj < d; ++jj) {
          if (jj == j) continue;
          v += theta(k++) * x(r, jj);
        }
        if (std::isfinite(v)) x(r, j) = v;
      }
    }
  }

  ImputedTable out;
  out.table = t;
  for (int j = 0; j < d; ++j) {
    Column& col = out.table.columns[features[j]];
    for (int r : gaps[j]) {
      CellProvenance p;
      p.row = r;
      p.col = features[j];
      p.value = x(r, j);
      col.values[r] = p.value;
      col.missing[r] = 0;
      out.provenance.push_back(std::move(p));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double hi = v[mid];
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return 0.5 * (v[mid - 1] + hi);
}

double percentile90_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  // Nearest-rank: the smallest value covering 90% of the sample.
  const size_t rank = static_cast<size_t>(
      std::ceil(0.9 * static_cast<double>(v.size())));
  const size_t idx = rank == 0 ? 0 : rank - 1;
  std::nth_element(v.begin(), v.begin() + idx, v.end());
  return v[idx];
}

std::vector<SweepReport> impurity_sweep(const Table& t,
                                        const std::vector<double>& rates,
                                        const std::vector<std::string>& imputers,
                                        uint64_t seed,
                                        const ImputeOptions& impute_opts,
                                        const BaselineOptions& baseline_opts) {
  for (const std::string& name : imputers) {
    if (name != "gs" && name != "mean" && name != "knn" && name != "mice") {
      throw ConfigError("unknown imputer '" + name + "'");
    }
  }

  std::vector<SweepReport> reports;
  uint64_t combo = 0;
  for (double rate : rates) {
    for (const std::string& name : imputers) {
      const MaskingPlan plan = make_masking_plan(t, rate, seed + combo);
      ++combo;
      const MaskedTable masked = apply_mask(t, plan);

      ImputedTable result;
      if (name == "gs") {  // granular-semantics imputer
        result = impute_table(masked.table, impute_opts);
      } else if (name == "mean") {
        result = mean_impute(masked.table);
      } else if (name == "knn") {
        result = knn_impute(masked.table, baseline_opts.knn_k);
      } else {
        result = mice_lite_impute(masked.table, baseline_opts.mice_sweeps);
      }

      SweepReport rep;
      rep.rate = rate;
      rep.imputer = name;
      rep.n_cells = plan.cells.size();
      rep.errors.reserve(plan.cells.size());
      // Ranges come from the pre-mask table so every imputer is scored
      // against the same denominator.
      for (size_t i = 0; i < plan.cells.size(); ++i) {
        const auto& [r, c] = plan.cells[i];
        const double pred = result.table.columns[c].values[r];
        rep.errors.push_back(error_metric(masked.truths[i], pred, t, c));
      }
      rep.mean_err = mean_of(rep.errors);
      rep.median_err = median_of(rep.errors);
      rep.p90_err = percentile90_of(rep.errors);
      log_info("sweep_done", "rate=" + format_double(rate) + " imputer=" + name +
                                 " mean_err=" + format_double(rep.mean_err));
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

}  // namespace granimpute
