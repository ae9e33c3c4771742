#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"
#include "buyflow/common/time.hpp"
#include "buyflow/predictor.hpp"

namespace buyflow::predict {

int most_used_class(std::span<const int> history) {
  if (history.empty()) return -1;
  std::map<int, std::size_t> counts;
  for (int c : history) ++counts[c];
  int best = -1;
  std::size_t best_count = 0;
  for (const auto& [c, n] : counts) {
    if (n > best_count) {
      best = c;
      best_count = n;
    }
  }
  return best;
}

int baseline_predict(Baseline kind, std::span<const int> history, int training_majority) {
  switch (kind) {
    case Baseline::Majority:
      return training_majority;
    case Baseline::LastClass:
      return history.empty() ? training_majority : history.back();
    case Baseline::MostUsedClass:
      return history.empty() ? training_majority : most_used_class(history);
  }
  return training_majority;
}

int majority_class(std::span<const int> labels, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  return static_cast<int>(std::ranges::max_element(counts) - counts.begin());
}

double accuracy(std::span<const int> labels, std::span<const int> predicted) {
  if (labels.size() != predicted.size()) throw Error("label and prediction counts differ");
  if (labels.empty()) return std::nan("");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double binary_auc(std::span<const double> scores, std::span<const char> positive) {
  if (scores.size() != positive.size()) throw Error("score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::sort(order, {}, [&](std::size_t i) { return scores[i]; });
  // Mann-Whitney U with average ranks for ties.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nan("");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double weighted_auc(std::span<const int> labels, std::span<const std::vector<double>> posteriors, int n_classes) {
  if (labels.size() != posteriors.size()) throw Error("label and posterior counts differ");
  if (labels.empty()) return std::nan("");
  double total = 0.0;
  std::vector<double> scores(labels.size());
  std::vector<char> pos(labels.size());
  for (int c = 0; c < n_classes; ++c) {
    std::size_t n_c = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      scores[i] = posteriors[i][static_cast<std::size_t>(c)];
      pos[i] = labels[i] == c ? 1 : 0;
      n_c += static_cast<std::size_t>(pos[i]);
    }
    if (n_c == 0) continue;
    const double w = static_cast<double>(n_c) / static_cast<double>(labels.size());
    const double auc = n_c == labels.size() ? 0.5 : binary_auc(scores, pos);
    total += w * auc;
  }
  return total;
}

double posterior_rmse(std::span<const int> labels, std::span<const std::vector<double>> posteriors, int n_classes) {
  if (labels.size() != posteriors.size()) throw Error("label and posterior counts differ");
  if (labels.empty()) return std::nan("");
  double sse = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int c = 0; c < n_classes; ++c) {
      const double d = posteriors[i][static_cast<std::size_t>(c)] - (labels[i] == c ? 1.0 : 0.0);
      sse += d * d;
    }
  }
  return std::sqrt(sse / (static_cast<double>(labels.size()) * n_classes));
}

EvalReport evaluate(const NBModel& model, std::span<const Instance> test, int training_majority) {
  if (test.empty()) throw Error("no test instances");
  EvalReport r;
  r.target = model.target;
  r.n_test = test.size();
  r.training_majority = training_majority;
  std::vector<int> labels, last, most, predicted;
  std::vector<std::vector<double>> posteriors;
  for (const auto& inst : test) {
    labels.push_back(inst.label);
    last.push_back(inst.last_class < 0 ? training_majority : inst.last_class);
    most.push_back(inst.most_used_class < 0 ? training_majority : inst.most_used_class);
    auto p = model.predict(inst.features);
    predicted.push_back(p.predicted);
    posteriors.push_back(std::move(p.probabilities));
  }
  const int n_classes = model.classifier.n_classes;
  const int test_majority = majority_class(labels, n_classes);
  r.majority_accuracy = accuracy(labels, std::vector<int>(labels.size(), test_majority));
  r.last_class_accuracy = accuracy(labels, last);
  r.most_used_accuracy = accuracy(labels, most);
  r.accuracy = accuracy(labels, predicted);
  const double best_baseline = std::max({r.majority_accuracy, r.last_class_accuracy, r.most_used_accuracy});
  r.absolute_improvement = r.accuracy - best_baseline;
  r.relative_improvement = best_baseline > 0.0 ? r.absolute_improvement / best_baseline : std::nan("");
  r.weighted_auc = weighted_auc(labels, posteriors, n_classes);
  r.rmse = posterior_rmse(labels, posteriors, n_classes);
  return r;
}

void write_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  csv::write_row(out, std::vector<std::string>{"prediction", "majority", "last_used", "most_used", "classifier",
                                               "absolute_improvement", "relative_improvement", "auc", "rmse"});
  for (const auto& r : reports) {
    csv::write_row(out, std::vector<std::string>{
                            std::string(target_name(r.target)), csv::num(r.majority_accuracy),
                            csv::num(r.last_class_accuracy), csv::num(r.most_used_accuracy), csv::num(r.accuracy),
                            csv::num(r.absolute_improvement), csv::num(r.relative_improvement),
                            csv::num(r.weighted_auc), csv::num(r.rmse)});
  }
}

TemporalSplit TemporalSplit::from_months(const Window& window, int train_months, int test_months) {
  if (train_months <= 0 || test_months <= 0) throw Error("split lengths must be positive");
  TemporalSplit s;
  s.train_start = window.start;
  s.train_end = add_months(window.start, train_months);
  s.test_end = add_months(s.train_end, test_months);
  return s;
}

double chi2_statistic(const std::vector<std::vector<double>>& table) {
  if (table.empty()) return 0.0;
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum(table.size(), 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != cols) throw Error("ragged contingency table");
    for (std::size_t j = 0; j < cols; ++j) {
      row_sum[i] += table[i][j];
      col_sum[j] += table[i][j];
      total += table[i][j];
    }
  }
  if (total <= 0.0) return 0.0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      if (e > 0.0) chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  return chi2;
}

std::vector<Chi2Entry> chi2_rank(const DiscreteMatrix& x, std::span<const int> labels, int n_classes,
                                 std::span<const std::string> names) {
  if (labels.size() != x.rows || names.size() != x.cols) throw Error("chi-squared input sizes disagree");
  std::vector<Chi2Entry> out;
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::vector<std::vector<double>> table(static_cast<std::size_t>(x.cardinality[f]),
                                           std::vector<double>(static_cast<std::size_t>(n_classes), 0.0));
    for (std::size_t r = 0; r < x.rows; ++r) {
      table[static_cast<std::size_t>(x.at(r, f))][static_cast<std::size_t>(labels[r])] += 1.0;
    }
    out.push_back({names[f], chi2_statistic(table)});
  }
  std::ranges::sort(out, [](const Chi2Entry& a, const Chi2Entry& b) {
    if (a.chi2 != b.chi2) return a.chi2 > b.chi2;
    return a.feature < b.feature;
  });
  return out;
}

void write_csv(std::ostream& out, const std::vector<Chi2Entry>& ranking) {
  csv::write_row(out, std::vector<std::string>{"rank", "feature", "chi2"});
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    csv::write_row(out, std::vector<std::string>{std::to_string(i + 1), ranking[i].feature, csv::num(ranking[i].chi2)});
  }
}

}  // namespace buyflow::predict
