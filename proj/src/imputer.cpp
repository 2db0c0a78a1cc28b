#include "granimpute/imputer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "granimpute/common.hpp"

namespace granimpute {

std::string_view fallback_name(FallbackKind k) {
  switch (k) {
    case FallbackKind::none: return "none";
    case FallbackKind::column_mean: return "column_mean";
    case FallbackKind::empty_column: return "empty_column";
  }
  return "unknown";
}

LocalModel fit_local(const Granule& g) {
  const int n = static_cast<int>(g.n_rows);
  const int p = static_cast<int>(g.n_cols) - 1;

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < p; ++c) x(r, c) = g.at(r, c);
    y(r) = g.at(r, p);
  }

  const Eigen::RowVectorXd mean_x = x.colwise().mean();
  const double mean_y = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean_x;
  const Eigen::VectorXd yc = y.array() - mean_y;

  const Eigen::MatrixXd gram = xc.transpose() * xc;
  const Eigen::VectorXd rhs = xc.transpose() * yc;

  LocalModel model;
  Eigen::VectorXd theta;
  // Too few rows for a determined system forces the ridge path outright.
  bool need_ridge = n < p + 2;
  if (!need_ridge) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const auto& d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    const double dmin = d.minCoeff();
    if (ldlt.info() != Eigen::Success || dmax <= 0.0 ||
        dmin <= 1e-10 * dmax) {
      need_ridge = true;
    } else {
      theta = ldlt.solve(rhs);
      if (!theta.allFinite()) need_ridge = true;
    }
  }
  if (need_ridge) {
    // trace(X'X)/p on the raw block, floored so an all-zero block still
    // yields a positive ridge.
    const double scale = x.squaredNorm() / static_cast<double>(p);
    double lambda = std::max(1e-8 * scale, 1e-12);
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd reg = gram;
      reg.diagonal().array() += lambda;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
      theta = ldlt.solve(rhs);
      if (ldlt.info() == Eigen::Success && theta.allFinite()) break;
      lambda *= 10.0;
    }
    if (!theta.allFinite()) theta.setZero(p);
    model.regularized = true;
  }

  model.coefficients.assign(theta.data(), theta.data() + p);
  model.intercept = mean_y - theta.dot(mean_x.transpose());
  return model;
}

double estimate_cell(const Table& t, const GranuleSpec& spec,
                     const LocalModel& model) {
  double v = model.intercept;
  for (size_t j = 0; j < spec.predictor_cols.size(); ++j) {
    v += model.coefficients[j] * t.value(spec.seed_row, spec.predictor_cols[j]);
  }
  return v;
}

namespace {

CellProvenance mean_fallback(const Table& t, int row, int col) {
  CellProvenance p;
  p.row = row;
  p.col = col;
  const Column& c = t.columns[col];
  bool any = false;
  double sum = 0.0;
  size_t n = 0;
  for (size_t r = 0; r < t.n_rows(); ++r) {
    if (!c.missing[r]) {
      sum += c.values[r];
      ++n;
      any = true;
    }
  }
  if (any) {
    p.value = sum / static_cast<double>(n);
    p.fallback = FallbackKind::column_mean;
  } else {
    p.value = 0.0;
    p.fallback = FallbackKind::empty_column;
  }
  return p;
}

}  // namespace

CellProvenance impute_cell(const Table& t, const MaskMatrix& mask,
                           const CorrelationMatrix& corr, int row, int col,
                           const ImputeOptions& opts) {
  // Full |rho| ranking for this column; predictor repair walks down it.
  const SemanticFeatureSet ranking =
      semantic_features(corr, col, std::max(1, corr.dim - 1));

  std::vector<int> predictors;
  predictors.reserve(opts.n_predictors);
  for (int candidate : ranking.members) {
    if (mask.is_missing(row, candidate)) continue;
    predictors.push_back(candidate);
    if (static_cast<int>(predictors.size()) == opts.n_predictors) break;
  }
  if (predictors.empty()) return mean_fallback(t, row, col);

  SemanticFeatureSet chosen;
  chosen.target_col = col;
  chosen.members = predictors;
  const RowSelection sel =
      select_rows(t, mask, row, chosen, opts.n_context_rows);
  if (sel.underfull) return mean_fallback(t, row, col);

  GranuleSpec spec;
  spec.seed_row = row;
  spec.target_col = col;
  spec.predictor_cols = std::move(predictors);
  spec.rows = sel.rows;

  const Granule g = form_granule(t, spec);
  const LocalModel model = fit_local(g);
  const double value = estimate_cell(t, spec, model);
  if (!std::isfinite(value)) return mean_fallback(t, row, col);

  CellProvenance p;
  p.row = row;
  p.col = col;
  p.value = value;
  p.fallback = FallbackKind::none;
  p.regularized = model.regularized;
  p.predictor_cols = std::move(spec.predictor_cols);
  p.rows = std::move(spec.rows);
  return p;
}

ImputedTable impute_table(const Table& t, const ImputeOptions& opts) {
  const MaskMatrix mask = build_mask(t);
  const CorrelationMatrix corr = correlation_matrix(t, mask);
  return impute_table(t, mask, corr, opts);
}

ImputedTable impute_table(const Table& t, const MaskMatrix& mask,
                          const CorrelationMatrix& corr,
                          const ImputeOptions& opts) {
  if (!t.all_numeric()) {
    throw DataError("imputation requires an all-numeric table (encode first)");
  }
  if (opts.n_predictors < 1) throw ConfigError("predictor count must be >= 1");
  if (opts.n_context_rows < 2) throw ConfigError("context row count must be >= 2");
  if (opts.n_predictors * opts.n_context_rows > opts.granule_budget) {
    throw ConfigError("granule size " + std::to_string(opts.n_predictors) +
                      "x" + std::to_string(opts.n_context_rows) +
                      " exceeds the cell budget of " +
                      std::to_string(opts.granule_budget));
  }
  ImputeOptions effective = opts;
  if (corr.dim >= 2 && effective.n_predictors > corr.dim - 1) {
    log_warn("delta_clamped",
             "requested=" + std::to_string(effective.n_predictors) +
                 " available=" + std::to_string(corr.dim - 1));
    effective.n_predictors = corr.dim - 1;
  }

  std::vector<std::pair<int, int>> cells;  // row-major over feature columns
  for (size_t r = 0; r < t.n_rows(); ++r) {
    for (size_t c = 0; c < t.n_cols(); ++c) {
      if (t.is_label(c)) continue;
      if (mask.is_missing(r, c)) {
        cells.emplace_back(static_cast<int>(r), static_cast<int>(c));
      }
    }
  }

  std::vector<CellProvenance> results(cells.size());
  const auto run_range = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      // Single-predictor degenerate case: a 1-column table has no matrix to
      // rank, go straight to the mean.
      if (corr.dim < 2) {
        results[i] = mean_fallback(t, cells[i].first, cells[i].second);
      } else {
        results[i] = impute_cell(t, mask, corr, cells[i].first,
                                 cells[i].second, effective);
      }
    }
  };

  const size_t n_workers =
      std::min<size_t>(worker_count(), std::max<size_t>(cells.size() / 1024, 1));
  if (n_workers <= 1 || cells.size() < 2048) {
    run_range(0, cells.size());
  } else {
    // Disjoint output slots and immutable inputs: chunked threads produce
    // exactly the sequential result.
    std::vector<std::thread> pool;
    const size_t chunk = (cells.size() + n_workers - 1) / n_workers;
    for (size_t w = 0; w < n_workers; ++w) {
      const size_t begin = w * chunk;
      const size_t end = std::min(cells.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  ImputedTable out;
  out.table = t;
  for (const auto& p : results) {
    out.table.columns[p.col].values[p.row] = p.value;
    out.table.columns[p.col].missing[p.row] = 0;
  }
  out.provenance = std::move(results);
  return out;
}

void write_provenance_jsonl(const ImputedTable& it, const Table& source,
                            std::ostream& out) {
  for (const auto& p : it.provenance) {
    out << "{\"row\":" << p.row << ",\"col\":" << p.col << ",\"col_name\":\""
        << source.columns[p.col].name << "\",\"value\":"
        << format_double(p.value) << ",\"fallback\":\"" << fallback_name(p.fallback)
        << "\",\"condition\":\"" << (p.regularized ? "regularized" : "ok")
        << "\",\"delta_used\":" << p.predictor_cols.size()
        << ",\"eta_used\":" << p.rows.size() << "}\n";
  }
}

void write_granules_jsonl(const ImputedTable& it, std::ostream& out) {
  for (const auto& p : it.provenance) {
    if (p.fallback != FallbackKind::none) continue;
    out << "{\"row\":" << p.row << ",\"col\":" << p.col << ",\"features\":[";
    for (size_t i = 0; i < p.predictor_cols.size(); ++i) {
      if (i) out << ',';
      out << p.predictor_cols[i];
    }
    out << "],\"rows\":[";
    for (size_t i = 0; i < p.rows.size(); ++i) {
      if (i) out << ',';
      out << p.rows[i];
    }
    out << "]}\n";
  }
}

}  // namespace granimpute
