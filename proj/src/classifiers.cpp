#include "granimpute/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "granimpute/common.hpp"
#include "granimpute/rng.hpp"

namespace granimpute {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(-m)) without overflow for large |m|.
double log1p_exp_neg(double m) {
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

}  // namespace

double LogisticRegression::loss_and_grad(const Dataset& data,
                                         std::span<const double> w, double b,
                                         double l2,
                                         std::vector<double>& grad_w,
                                         double& grad_b) {
  const size_t n = data.n_rows;
  const size_t d = data.n_cols;
  grad_w.assign(d, 0.0);
  grad_b = 0.0;
  double loss = 0.0;
  for (size_t r = 0; r < n; ++r) {
    const auto row = data.row(r);
    double z = b;
    for (size_t j = 0; j < d; ++j) z += w[j] * row[j];
    const double y = data.y[r];
    const double margin = (2.0 * y - 1.0) * z;
    loss += log1p_exp_neg(margin);
    const double diff = sigmoid(z) - y;
    for (size_t j = 0; j < d; ++j) grad_w[j] += diff * row[j];
    grad_b += diff;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  grad_b *= inv_n;
  for (size_t j = 0; j < d; ++j) {
    grad_w[j] = grad_w[j] * inv_n + l2 * w[j];
    loss += 0.5 * l2 * w[j] * w[j];
  }
  return loss;
}

void LogisticRegression::fit(const Dataset& data, const Params& params) {
  const size_t d = data.n_cols;
  w_.assign(d, 0.0);
  b_ = 0.0;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  std::vector<double> trial_w(d);
  std::vector<double> scratch_g;
  double scratch_b = 0.0;
  double step = 1.0;

  double loss = loss_and_grad(data, w_, b_, params.l2, grad_w, grad_b);
  for (int epoch = 0; epoch < params.max_epochs; ++epoch) {
    double gnorm2 = grad_b * grad_b;
    for (double g : grad_w) gnorm2 += g * g;
    if (std::sqrt(gnorm2) < params.grad_tol) break;

    // Backtracking with Armijo sufficient decrease; step carries over so a
    // well-scaled problem settles into few halvings per epoch.
    step = std::min(step * 2.0, 1e3);
    double trial_b = 0.0;
    double trial_loss = 0.0;
    for (;;) {
      for (size_t j = 0; j < d; ++j) trial_w[j] = w_[j] - step * grad_w[j];
      trial_b = b_ - step * grad_b;
      trial_loss =
          loss_and_grad(data, trial_w, trial_b, params.l2, scratch_g, scratch_b);
      if (trial_loss <= loss - 1e-4 * step * gnorm2 || step < 1e-12) break;
      step *= 0.5;
    }
    w_.swap(trial_w);
    b_ = trial_b;
    loss = trial_loss;
    grad_w.swap(scratch_g);
    grad_b = scratch_b;
  }
}

double LogisticRegression::score(std::span<const double> row) const {
  double z = b_;
  for (size_t j = 0; j < w_.size(); ++j) z += w_[j] * row[j];
  return sigmoid(z);
}

void KnnClassifier::fit(const Dataset& data, int k) {
  if (k < 1) throw ConfigError("neighbor count must be >= 1");
  train_ = data;
  k_ = k;
}

double KnnClassifier::score(std::span<const double> row) const {
  const size_t n = train_.n_rows;
  const size_t k = std::min<size_t>(k_, n);
  std::vector<std::pair<double, size_t>> dist(n);
  for (size_t r = 0; r < n; ++r) {
    const auto tr = train_.row(r);
    double s = 0.0;
    for (size_t j = 0; j < train_.n_cols; ++j) {
      const double d = tr[j] - row[j];
      s += d * d;
    }
    dist[r] = {s, r};
  }
  // (distance, row) ordering makes the tie-break toward the lower row index.
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  size_t pos = 0;
  for (size_t i = 0; i < k; ++i) pos += train_.y[dist[i].second];
  return static_cast<double>(pos) / static_cast<double>(k);
}

void DecisionTreeClassifier::fit(const Dataset& data, int max_depth,
                                 int min_leaf) {
  TreeParams params;
  params.max_depth = max_depth;
  params.min_leaf = min_leaf;
  std::vector<size_t> rows(data.n_rows);
  std::iota(rows.begin(), rows.end(), 0);
  tree_.fit_classification(data, rows, params, nullptr);
}

double DecisionTreeClassifier::score(std::span<const double> row) const {
  return tree_.predict(row);
}

void RandomForest::fit(const Dataset& data, const Params& params,
                       uint64_t seed) {
  const size_t n = data.n_rows;
  const size_t d = data.n_cols;
  trees_.assign(params.n_trees, {});
  importances_.assign(d, 0.0);

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  tp.n_split_features =
      std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));

  std::vector<double> oob_score(n, 0.0);
  std::vector<int> oob_votes(n, 0);
  std::vector<size_t> sample(n);
  std::vector<char> in_bag(n);
  std::vector<double> tree_importance;

  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng(mix_seed(seed, static_cast<uint64_t>(t)));
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (size_t i = 0; i < n; ++i) {
      sample[i] = rng.below(n);
      in_bag[sample[i]] = 1;
    }
    trees_[t].fit_classification(data, sample, tp, &rng, &tree_importance);
    for (size_t j = 0; j < d; ++j) importances_[j] += tree_importance[j];
    for (size_t r = 0; r < n; ++r) {
      if (!in_bag[r]) {
        oob_score[r] += trees_[t].predict(data.row(r));
        ++oob_votes[r];
      }
    }
  }

  double imp_sum = 0.0;
  for (double v : importances_) imp_sum += v;
  if (imp_sum > 0.0) {
    for (double& v : importances_) v /= imp_sum;
  }

  size_t covered = 0, correct = 0;
  for (size_t r = 0; r < n; ++r) {
    if (oob_votes[r] == 0) continue;
    ++covered;
    const int pred = oob_score[r] / oob_votes[r] >= 0.5 ? 1 : 0;
    correct += pred == data.y[r];
  }
  oob_accuracy_ = covered ? static_cast<double>(correct) /
                                static_cast<double>(covered)
                          : 0.0;
}

double RandomForest::score(std::span<const double> row) const {
  if (trees_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(row);
  return sum / static_cast<double>(trees_.size());
}

void GradientBoosting::fit(const Dataset& data, const Params& params) {
  const size_t n = data.n_rows;
  learning_rate_ = params.learning_rate;

  size_t n_pos = 0;
  for (int y : data.y) n_pos += y;
  const double p0 =
      std::clamp(static_cast<double>(n_pos) / static_cast<double>(n), 1e-6,
                 1.0 - 1e-6);
  f0_ = std::log(p0 / (1.0 - p0));

  std::vector<double> f(n, f0_);
  std::vector<double> residual(n);
  std::vector<double> hessian(n);
  std::vector<size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);

  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;

  trees_.assign(params.n_trees, {});
  for (int t = 0; t < params.n_trees; ++t) {
    for (size_t r = 0; r < n; ++r) {
      const double p = sigmoid(f[r]);
      residual[r] = data.y[r] - p;
      hessian[r] = std::max(p * (1.0 - p), 1e-12);
    }
    trees_[t].fit_regression(data, rows, residual, hessian, tp, nullptr);
    for (size_t r = 0; r < n; ++r) {
      f[r] += learning_rate_ * trees_[t].predict(data.row(r));
    }
  }
}

double GradientBoosting::score(std::span<const double> row) const {
  double f = f0_;
  for (const auto& t : trees_) f += learning_rate_ * t.predict(row);
  return sigmoid(f);
}

void NeuralNet::init(size_t input_dim, int hidden, uint64_t seed) {
  in_dim_ = input_dim;
  hidden_ = hidden;
  Rng rng(seed);
  w1_.resize(static_cast<size_t>(hidden) * input_dim);
  const double s1 = std::sqrt(2.0 / static_cast<double>(input_dim));
  for (double& v : w1_) v = rng.normal() * s1;
  b1_.assign(hidden, 0.0);
  w2_.resize(hidden);
  const double s2 = std::sqrt(1.0 / static_cast<double>(hidden));
  for (double& v : w2_) v = rng.normal() * s2;
  b2_ = 0.0;
}

std::vector<double> NeuralNet::parameters() const {
  std::vector<double> flat;
  flat.reserve(w1_.size() + b1_.size() + w2_.size() + 1);
  flat.insert(flat.end(), w1_.begin(), w1_.end());
  flat.insert(flat.end(), b1_.begin(), b1_.end());
  flat.insert(flat.end(), w2_.begin(), w2_.end());
  flat.push_back(b2_);
  return flat;
}

void NeuralNet::set_parameters(std::span<const double> flat) {
  size_t k = 0;
  for (double& v : w1_) v = flat[k++];
  for (double& v : b1_) v = flat[k++];
  for (double& v : w2_) v = flat[k++];
  b2_ = flat[k];
}

double NeuralNet::loss_and_grad(const Dataset& data,
                                std::span<const size_t> rows,
                                std::vector<double>& grad) const {
  const size_t h = static_cast<size_t>(hidden_);
  const size_t n_params = w1_.size() + b1_.size() + w2_.size() + 1;
  grad.assign(n_params, 0.0);
  double* gw1 = grad.data();
  double* gb1 = gw1 + w1_.size();
  double* gw2 = gb1 + b1_.size();
  double* gb2 = gw2 + w2_.size();

  std::vector<double> act(h);
  double loss = 0.0;
  for (size_t r : rows) {
    const auto row = data.row(r);
    double z2 = b2_;
    for (size_t i = 0; i < h; ++i) {
      double z = b1_[i];
      const double* wrow = w1_.data() + i * in_dim_;
      for (size_t j = 0; j < in_dim_; ++j) z += wrow[j] * row[j];
      act[i] = z > 0.0 ? z : 0.0;
      z2 += w2_[i] * act[i];
    }
    const double y = data.y[r];
    loss += log1p_exp_neg((2.0 * y - 1.0) * z2);

    const double delta2 = sigmoid(z2) - y;
    *gb2 += delta2;
    for (size_t i = 0; i < h; ++i) {
      gw2[i] += delta2 * act[i];
      if (act[i] > 0.0) {
        const double delta1 = delta2 * w2_[i];
        gb1[i] += delta1;
        double* grow = gw1 + i * in_dim_;
        for (size_t j = 0; j < in_dim_; ++j) grow[j] += delta1 * row[j];
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad) g *= inv_n;
  return loss * inv_n;
}

void NeuralNet::fit(const Dataset& data, const Params& params, uint64_t seed) {
  init(data.n_cols, params.hidden, mix_seed(seed, "init"));

  Rng order_rng(mix_seed(seed, "order"));
  std::vector<size_t> order(data.n_rows);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<double> flat = parameters();

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (size_t begin = 0; begin < order.size();
         begin += static_cast<size_t>(params.batch)) {
      const size_t end =
          std::min(order.size(), begin + static_cast<size_t>(params.batch));
      loss_and_grad(data,
                    std::span<const size_t>(order.data() + begin, end - begin),
                    grad);
      for (size_t i = 0; i < flat.size(); ++i) {
        flat[i] -= params.learning_rate * grad[i];
      }
      set_parameters(flat);
    }
  }
}

double NeuralNet::score(std::span<const double> row) const {
  double z2 = b2_;
  for (size_t i = 0; i < static_cast<size_t>(hidden_); ++i) {
    double z = b1_[i];
    const double* wrow = w1_.data() + i * in_dim_;
    for (size_t j = 0; j < in_dim_; ++j) z += wrow[j] * row[j];
    if (z > 0.0) z2 += w2_[i] * z;
  }
  return sigmoid(z2);
}

std::unique_ptr<Classifier> train_classifier(const std::string& kind,
                                             const Dataset& train,
                                             uint64_t seed) {
  if (train.n_rows == 0) throw DataError("empty training set");
  for (double v : train.x) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
  bool has0 = false, has1 = false;
  for (int y : train.y) (y ? has1 : has0) = true;
  if (!has0 || !has1) {
    throw DataError("training set holds a single class");
  }

  if (kind == "logreg") {
    auto m = std::make_unique<LogisticRegression>();
    m->fit(train);
    return m;
  }
  if (kind == "knn") {
    auto m = std::make_unique<KnnClassifier>();
    m->fit(train, 5);
    return m;
  }
  if (kind == "dtree") {
    auto m = std::make_unique<DecisionTreeClassifier>();
    m->fit(train);
    return m;
  }
  if (kind == "rforest") {
    auto m = std::make_unique<RandomForest>();
    m->fit(train, {}, mix_seed(seed, "rforest"));
    log_info("rforest_oob", "oob_accuracy=" + format_double(m->oob_accuracy()));
    return m;
  }
  if (kind == "gboost") {
    auto m = std::make_unique<GradientBoosting>();
    m->fit(train);
    return m;
  }
  if (kind == "nnet") {
    auto m = std::make_unique<NeuralNet>();
    m->fit(train, {}, mix_seed(seed, "nnet"));
    return m;
  }
  throw ConfigError("unknown classifier '" + kind + "'");
}

}  // namespace granimpute
