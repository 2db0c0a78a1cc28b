#include "granimpute/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace granimpute {

double gini_impurity(size_t n_pos, size_t n_total) {
  if (n_total == 0) return 0.0;
  const double p = static_cast<double>(n_pos) / static_cast<double>(n_total);
  return 2.0 * p * (1.0 - p);
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  size_t n_left = 0;
};

// Candidate feature ids for one node: all of them, or a uniform subset.
std::vector<int> candidate_features(size_t n_cols, int n_split_features,
                                    Rng* rng, std::vector<int>& scratch) {
  scratch.resize(n_cols);
  std::iota(scratch.begin(), scratch.end(), 0);
  if (n_split_features <= 0 ||
      static_cast<size_t>(n_split_features) >= n_cols || rng == nullptr) {
    return scratch;
  }
  for (int i = 0; i < n_split_features; ++i) {
    const size_t j = i + rng->below(scratch.size() - i);
    std::swap(scratch[i], scratch[j]);
  }
  return {scratch.begin(), scratch.begin() + n_split_features};
}

}  // namespace

void DecisionTree::fit_classification(const Dataset& data,
                                      std::span<const size_t> rows,
                                      const TreeParams& params, Rng* rng,
                                      std::vector<double>* importance_out) {
  nodes_.clear();
  if (rows.empty()) {
    nodes_.push_back({});
    nodes_[0].value = 0.0;
    return;
  }
  if (importance_out) importance_out->assign(data.n_cols, 0.0);

  std::vector<size_t> idx(rows.begin(), rows.end());
  const double n_total = static_cast<double>(idx.size());

  struct Work {
    int node;
    size_t begin;
    size_t end;
    int depth;
  };
  std::vector<Work> stack;
  nodes_.push_back({});
  stack.push_back({0, 0, idx.size(), 0});

  std::vector<int> feat_scratch;
  std::vector<std::pair<double, int>> sorted;  // (feature value, label)

  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    const size_t n = w.end - w.begin;

    size_t n_pos = 0;
    for (size_t i = w.begin; i < w.end; ++i) n_pos += data.y[idx[i]];
    const double node_gini = gini_impurity(n_pos, n);

    const bool depth_capped = params.max_depth >= 0 && w.depth >= params.max_depth;
    if (node_gini == 0.0 || depth_capped ||
        n < 2 * static_cast<size_t>(params.min_leaf)) {
      nodes_[w.node].value = static_cast<double>(n_pos) / static_cast<double>(n);
      continue;
    }

    SplitChoice best;
    const std::vector<int> feats =
        candidate_features(data.n_cols, params.n_split_features, rng,
                           feat_scratch);
    for (int f : feats) {
      sorted.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const size_t r = idx[w.begin + i];
        sorted[i] = {data.at(r, f), data.y[r]};
      }
      std::sort(sorted.begin(), sorted.end());

      size_t left_pos = 0;
      for (size_t i = 0; i + 1 < n; ++i) {
        left_pos += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const size_t n_left = i + 1;
        const size_t n_right = n - n_left;
        if (n_left < static_cast<size_t>(params.min_leaf) ||
            n_right < static_cast<size_t>(params.min_leaf)) {
          continue;
        }
        const double child =
            (static_cast<double>(n_left) * gini_impurity(left_pos, n_left) +
             static_cast<double>(n_right) *
                 gini_impurity(n_pos - left_pos, n_right)) /
            static_cast<double>(n);
        const double gain = node_gini - child;
        if (gain > best.gain) {
          best = {f, sorted[i].first, gain, n_left};
        }
      }
    }

    if (best.feature < 0 || best.gain <= 0.0) {
      nodes_[w.node].value = static_cast<double>(n_pos) / static_cast<double>(n);
      continue;
    }
    if (importance_out) {
      // Weighted impurity decrease: node share of the sample times the gain.
      (*importance_out)[best.feature] +=
          (static_cast<double>(n) / n_total) * best.gain;
    }

    auto mid_it = std::partition(
        idx.begin() + w.begin, idx.begin() + w.end, [&](size_t r) {
          return data.at(r, best.feature) <= best.threshold;
        });
    const size_t mid = static_cast<size_t>(mid_it - idx.begin());

    const int left = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const int right = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[w.node].feature = best.feature;
    nodes_[w.node].threshold = best.threshold;
    nodes_[w.node].left = left;
    nodes_[w.node].right = right;
    stack.push_back({right, mid, w.end, w.depth + 1});
    stack.push_back({left, w.begin, mid, w.depth + 1});
  }
}

void DecisionTree::fit_regression(const Dataset& data,
                                  std::span<const size_t> rows,
                                  std::span<const double> gradient,
                                  std::span<const double> hessian,
                                  const TreeParams& params, Rng* rng) {
  nodes_.clear();
  if (rows.empty()) {
    nodes_.push_back({});
    return;
  }

  std::vector<size_t> idx(rows.begin(), rows.end());

  // Newton step for a leaf: sum(gradient) / sum(hessian).
  const auto leaf_value = [&](size_t begin, size_t end) {
    double g = 0.0, h = 0.0;
    for (size_t i = begin; i < end; ++i) {
      g += gradient[idx[i]];
      h += hessian[idx[i]];
    }
    return h > 1e-12 ? g / h : 0.0;
  };

  struct Work {
    int node;
    size_t begin;
    size_t end;
    int depth;
  };
  std::vector<Work> stack;
  nodes_.push_back({});
  stack.push_back({0, 0, idx.size(), 0});

  std::vector<int> feat_scratch;
  std::vector<std::pair<double, double>> sorted;  // (feature value, gradient)

  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    const size_t n = w.end - w.begin;

    const bool depth_capped = params.max_depth >= 0 && w.depth >= params.max_depth;
    if (depth_capped || n < 2 * static_cast<size_t>(params.min_leaf)) {
      nodes_[w.node].value = leaf_value(w.begin, w.end);
      continue;
    }

    double total = 0.0;
    for (size_t i = w.begin; i < w.end; ++i) total += gradient[idx[i]];

    // Maximizing sumL^2/nL + sumR^2/nR minimizes the squared error of the
    // two-mean fit to the gradients.
    SplitChoice best;
    double best_score = total * total / static_cast<double>(n);
    const std::vector<int> feats =
        candidate_features(data.n_cols, params.n_split_features, rng,
                           feat_scratch);
    for (int f : feats) {
      sorted.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const size_t r = idx[w.begin + i];
        sorted[i] = {data.at(r, f), gradient[r]};
      }
      std::sort(sorted.begin(), sorted.end());

      double left_sum = 0.0;
      for (size_t i = 0; i + 1 < n; ++i) {
        left_sum += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const size_t n_left = i + 1;
        const size_t n_right = n - n_left;
        if (n_left < static_cast<size_t>(params.min_leaf) ||
            n_right < static_cast<size_t>(params.min_leaf)) {
          continue;
        }
        const double right_sum = total - left_sum;
        const double score =
            left_sum * left_sum / static_cast<double>(n_left) +
            right_sum * right_sum / static_cast<double>(n_right);
        if (score > best_score + 1e-12) {
          best_score = score;
          best = {f, sorted[i].first, score, n_left};
        }
      }
    }

    if (best.feature < 0) {
      nodes_[w.node].value = leaf_value(w.begin, w.end);
      continue;
    }

    auto mid_it = std::partition(
        idx.begin() + w.begin, idx.begin() + w.end, [&](size_t r) {
          return data.at(r, best.feature) <= best.threshold;
        });
    const size_t mid = static_cast<size_t>(mid_it - idx.begin());

    const int left = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    const int right = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[w.node].feature = best.feature;
    nodes_[w.node].threshold = best.threshold;
    nodes_[w.node].left = left;
    nodes_[w.node].right = right;
    stack.push_back({right, mid, w.end, w.depth + 1});
    stack.push_back({left, w.begin, mid, w.depth + 1});
  }
}

double DecisionTree::predict(std::span<const double> row) const {
  if (nodes_.empty()) return 0.0;
  int cur = 0;
  while (nodes_[cur].feature >= 0) {
    cur = row[nodes_[cur].feature] <= nodes_[cur].threshold ? nodes_[cur].left
                                                            : nodes_[cur].right;
  }
  return nodes_[cur].value;
}

}  // namespace granimpute
