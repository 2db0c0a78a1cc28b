#include "granimpute/metrics.hpp"

#include <algorithm>

#include "granimpute/common.hpp"

namespace granimpute {

EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels,
                           const std::string& classifier_name) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw ConfigError("scores and labels must be equal-length and non-empty");
  }

  EvalReport rep;
  rep.classifier = classifier_name;

  long n_pos = 0, n_neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool truth = labels[i] == 1;
    const bool pred = scores[i] >= 0.5;
    (truth ? n_pos : n_neg)++;
    if (truth && pred) ++rep.confusion.tp;
    else if (truth) ++rep.confusion.fn;
    else if (pred) ++rep.confusion.fp;
    else ++rep.confusion.tn;
  }
  rep.accuracy = static_cast<double>(rep.confusion.tp + rep.confusion.tn) /
                 static_cast<double>(scores.size());
  rep.recall_pos = n_pos ? static_cast<double>(rep.confusion.tp) / n_pos : 0.0;
  rep.recall_neg = n_neg ? static_cast<double>(rep.confusion.tn) / n_neg : 0.0;

  std::vector<std::pair<double, int>> ranked(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) ranked[i] = {scores[i], labels[i]};
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  // One ROC point per distinct score, ties grouped, descending from (0,0).
  // Trapezoids over this polyline equal the Mann-Whitney statistic with tied
  // pairs counted half.
  const double inv_pos = n_pos ? 1.0 / n_pos : 0.0;
  const double inv_neg = n_neg ? 1.0 / n_neg : 0.0;
  rep.roc.push_back({0.0, 0.0});
  long tp = 0, fp = 0;
  double auc = 0.0;
  size_t i = 0;
  while (i < ranked.size()) {
    size_t j = i;
    long d_tp = 0, d_fp = 0;
    while (j < ranked.size() && ranked[j].first == ranked[i].first) {
      (ranked[j].second == 1 ? d_tp : d_fp)++;
      ++j;
    }
    const double fpr0 = fp * inv_neg;
    const double tpr0 = tp * inv_pos;
    tp += d_tp;
    fp += d_fp;
    const double fpr1 = fp * inv_neg;
    const double tpr1 = tp * inv_pos;
    auc += (fpr1 - fpr0) * 0.5 * (tpr0 + tpr1);
    rep.roc.push_back({fpr1, tpr1});
    i = j;
  }
  rep.auc = auc;
  return rep;
}

EvalReport evaluate(const Classifier& model, const Dataset& test) {
  std::vector<double> scores(test.n_rows);
  for (size_t r = 0; r < test.n_rows; ++r) scores[r] = model.score(test.row(r));
  return evaluate_scores(scores, test.y, std::string(model.name()));
}

}  // namespace granimpute
