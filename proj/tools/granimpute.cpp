#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "granimpute/baselines.hpp"
#include "granimpute/common.hpp"
#include "granimpute/correlation.hpp"
#include "granimpute/imputer.hpp"
#include "granimpute/io.hpp"
#include "granimpute/pipeline.hpp"

namespace {

using namespace granimpute;

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t begin = 0;
  for (;;) {
    const size_t comma = s.find(',', begin);
    if (comma == std::string::npos) {
      out.push_back(s.substr(begin));
      return out;
    }
    out.push_back(s.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

std::vector<double> parse_rates(const std::string& s) {
  std::vector<double> rates;
  for (const std::string& tok : split_commas(s)) {
    double r = 0.0;
    if (!parse_double(trim(tok), r) || r <= 0.0 || r >= 1.0) {
      throw ConfigError("rate '" + tok + "' must be a number in (0,1)");
    }
    rates.push_back(r);
  }
  if (rates.empty()) throw ConfigError("at least one rate required");
  return rates;
}

struct CommonOpts {
  std::string input;
  std::string missing_tokens;  // empty = defaults
};

Table load_input(const CommonOpts& opts) {
  const MissingTokenSet missing =
      opts.missing_tokens.empty()
          ? MissingTokenSet()
          : MissingTokenSet(split_commas(opts.missing_tokens));
  Table t = load_table_file(opts.input, missing);
  log_info("table_loaded", "path=" + opts.input +
                               " rows=" + std::to_string(t.n_rows()) +
                               " cols=" + std::to_string(t.n_cols()));
  return t;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--input", opts.input, "Input table (.csv or .arff)")
      ->required();
  cmd->add_option("--missing-tokens", opts.missing_tokens,
                  "Comma-separated tokens marking a missing cell "
                  "(replaces the defaults: empty, ?, NaN, na)");
}

void write_text_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << bytes;
  if (!out) throw DataError("write failed for '" + path + "'");
}

int run_stats(const CommonOpts& common) {
  const Table t = load_input(common);
  std::cout << "rows=" << t.n_rows() << '\n';
  std::cout << "cols=" << t.n_cols() << '\n';
  std::cout << "features=" << t.feature_cols().size() << '\n';
  std::cout << "label="
            << (t.label_col ? t.columns[*t.label_col].name : std::string("none"))
            << '\n';
  std::cout << "missing_total=" << t.missing_count_features() << '\n';
  if (t.label_col) {
    const Column& label = t.columns[*t.label_col];
    std::map<std::string, size_t> counts;
    for (size_t r = 0; r < t.n_rows(); ++r) {
      if (label.missing[r]) continue;
      const std::string key = label.kind == FeatureKind::categorical
                                  ? label.tokens[r]
                                  : format_double(label.values[r]);
      ++counts[key];
    }
    std::cout << "class_counts=";
    bool first = true;
    for (const auto& [key, n] : counts) {
      if (!first) std::cout << ',';
      std::cout << key << ':' << n;
      first = false;
    }
    std::cout << '\n';
  }
  for (size_t c = 0; c < t.n_cols(); ++c) {
    const Column& col = t.columns[c];
    std::cout << "column=" << col.name << " kind="
              << (col.kind == FeatureKind::numeric ? "numeric" : "categorical")
              << " missing=" << t.missing_count_col(c) << '\n';
  }
  return 0;
}

struct ImputeOpts {
  CommonOpts common;
  std::string output;
  ImputeOptions impute;
  std::string dump_provenance;
  std::string dump_granules;
  std::string dump_corr;
};

int run_impute(const ImputeOpts& opts) {
  const Table raw = load_input(opts.common);
  auto [t, categories] = encode_categoricals(raw);
  if (!categories.codings.empty()) {
    log_info("categoricals_encoded",
             "columns=" + std::to_string(categories.codings.size()));
  }
  const MaskMatrix mask = build_mask(t);
  const CorrelationMatrix corr = correlation_matrix(t, mask);
  if (!opts.dump_corr.empty()) {
    std::ofstream out(opts.dump_corr, std::ios::binary);
    if (!out) throw DataError("cannot open '" + opts.dump_corr + "' for writing");
    write_correlation_csv(corr, t, out);
  }

  const ImputedTable result = impute_table(t, mask, corr, opts.impute);
  log_info("impute_done", "cells=" + std::to_string(result.provenance.size()));

  write_csv_file(result.table, opts.output);
  if (!opts.dump_provenance.empty()) {
    std::ofstream out(opts.dump_provenance, std::ios::binary);
    if (!out) {
      throw DataError("cannot open '" + opts.dump_provenance + "' for writing");
    }
    write_provenance_jsonl(result, t, out);
  }
  if (!opts.dump_granules.empty()) {
    std::ofstream out(opts.dump_granules, std::ios::binary);
    if (!out) {
      throw DataError("cannot open '" + opts.dump_granules + "' for writing");
    }
    write_granules_jsonl(result, out);
  }
  return 0;
}

struct MaskBenchOpts {
  CommonOpts common;
  std::string rates = "0.05,0.1,0.2,0.3";
  std::string imputers = "gs,mean,knn,mice";
  uint64_t seed = 42;
  std::string report;
  ImputeOptions impute;
};

int run_mask_bench(const MaskBenchOpts& opts) {
  const Table raw = load_input(opts.common);
  auto [t, categories] = encode_categoricals(raw);
  (void)categories;

  std::vector<std::string> imputers;
  for (const std::string& tok : split_commas(opts.imputers)) {
    imputers.push_back(trim(tok));
  }
  const std::vector<SweepReport> reports =
      impurity_sweep(t, parse_rates(opts.rates), imputers, opts.seed,
                     opts.impute);

  nlohmann::json arr = nlohmann::json::array();
  for (const SweepReport& rep : reports) {
    arr.push_back({{"rate", rep.rate},
                   {"imputer", rep.imputer},
                   {"n_cells", rep.n_cells},
                   {"mean_err", rep.mean_err},
                   {"median_err", rep.median_err},
                   {"p90_err", rep.p90_err}});
  }
  write_text_file(opts.report, arr.dump(2) + "\n");
  log_info("report_written", "path=" + opts.report);
  return 0;
}

struct PipelineOpts {
  CommonOpts common;
  std::string classifiers = "logreg,knn,dtree,rforest,gboost,nnet";
  PipelineConfig config;
  std::string report;
};

int run_pipeline_cmd(const PipelineOpts& opts) {
  const Table raw = load_input(opts.common);
  PipelineConfig config = opts.config;
  for (const std::string& tok : split_commas(opts.classifiers)) {
    config.classifiers.push_back(trim(tok));
  }
  const PipelineResult result = run_pipeline(raw, config);

  nlohmann::json arr = nlohmann::json::array();
  for (const EvalReport& rep : result.reports) {
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& pt : rep.roc) roc.push_back({pt[0], pt[1]});
    arr.push_back({{"classifier", rep.classifier},
                   {"accuracy", rep.accuracy},
                   {"auc", rep.auc},
                   {"confusion",
                    {{"tp", rep.confusion.tp},
                     {"fp", rep.confusion.fp},
                     {"tn", rep.confusion.tn},
                     {"fn", rep.confusion.fn}}},
                   {"roc", roc}});
  }
  write_text_file(opts.report, arr.dump(2) + "\n");
  log_info("report_written", "path=" + opts.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granular-semantics missing-value imputation and "
               "bankruptcy-prediction pipeline"};
  app.require_subcommand(1);

  CommonOpts stats_opts;
  CLI::App* stats = app.add_subcommand(
      "stats", "Print row/column counts, missingness, and class balance");
  add_common(stats, stats_opts);

  ImputeOpts impute_opts;
  CLI::App* impute = app.add_subcommand(
      "impute",
      "Fill every missing feature cell via granule-local regression "
      "(categorical columns are numerically encoded first)");
  add_common(impute, impute_opts.common);
  impute->add_option("--output", impute_opts.output, "Imputed table (CSV)")
      ->required();
  impute->add_option("--delta", impute_opts.impute.n_predictors,
                     "Predictor features per granule")->capture_default_str();
  impute->add_option("--eta", impute_opts.impute.n_context_rows,
                     "Context rows per granule")->capture_default_str();
  impute->add_option("--granule-budget", impute_opts.impute.granule_budget,
                     "Maximum delta*eta cells per granule")->capture_default_str();
  impute->add_option("--dump-provenance", impute_opts.dump_provenance,
                     "Write one JSON line per imputed cell");
  impute->add_option("--dump-granules", impute_opts.dump_granules,
                     "Write one JSON line per formed granule");
  impute->add_option("--dump-corr", impute_opts.dump_corr,
                     "Write the feature correlation matrix as CSV");

  MaskBenchOpts bench_opts;
  CLI::App* bench = app.add_subcommand(
      "mask-bench",
      "Mask known cells at the given rates, impute them back with each "
      "configured imputer, and report normalized errors");
  add_common(bench, bench_opts.common);
  bench->add_option("--rates", bench_opts.rates,
                    "Comma-separated masking rates in (0,1)")->capture_default_str();
  bench->add_option("--imputers", bench_opts.imputers,
                    "Comma-separated subset of gs,mean,knn,mice")->capture_default_str();
  bench->add_option("--seed", bench_opts.seed, "Masking seed")->capture_default_str();
  bench->add_option("--report", bench_opts.report, "Report JSON path")
      ->required();
  bench->add_option("--delta", bench_opts.impute.n_predictors,
                    "Predictor features per granule (gs imputer)")->capture_default_str();
  bench->add_option("--eta", bench_opts.impute.n_context_rows,
                    "Context rows per granule (gs imputer)")->capture_default_str();

  PipelineOpts pipe_opts;
  CLI::App* pipe = app.add_subcommand(
      "pipeline",
      "Impute, select features by forest importance, balance the training "
      "fold, then train and evaluate the configured classifiers");
  add_common(pipe, pipe_opts.common);
  pipe->add_option("--classifiers", pipe_opts.classifiers,
                   "Comma-separated subset of logreg,knn,dtree,rforest,"
                   "gboost,nnet")->capture_default_str();
  pipe->add_option("--k-features", pipe_opts.config.k_features,
                   "Features kept after forest ranking")->capture_default_str();
  pipe->add_option("--seed", pipe_opts.config.seed,
                   "Seed for selection, split, balancing, and training")->capture_default_str();
  pipe->add_option("--report", pipe_opts.report, "Report JSON path")
      ->required();
  pipe->add_option("--delta", pipe_opts.config.impute.n_predictors,
                   "Predictor features per granule")->capture_default_str();
  pipe->add_option("--eta", pipe_opts.config.impute.n_context_rows,
                   "Context rows per granule")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (stats->parsed()) return run_stats(stats_opts);
    if (impute->parsed()) return run_impute(impute_opts);
    if (bench->parsed()) return run_mask_bench(bench_opts);
    if (pipe->parsed()) return run_pipeline_cmd(pipe_opts);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const granimpute::ConfigError& e) {
    std::cerr << "level=error event=config " << e.what() << '\n';
    return 1;
  } catch (const granimpute::DataError& e) {
    std::cerr << "level=error event=data " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "level=error event=internal " << e.what() << '\n';
    return 2;
  }
}
