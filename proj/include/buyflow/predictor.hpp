#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "buyflow/datastore.hpp"

namespace buyflow::predict {

enum class Target { Price, Time };

std::string_view target_name(Target t);
Target parse_target(std::string_view text);  // "price" | "time"

inline constexpr int kClassCount = 5;

// P1: p < 600, P2: [600, 1200), P3: [1200, 2000), P4: [2000, 4000), P5: >= 4000.
int price_class(std::int64_t price_cents);
// T1: d < 1, T2: [1, 5), T3: [5, 14), T4: [14, 33), T5: >= 33 days.
int time_class(double delay_days);
// Dispatches on the target; throws on negative values.
int discretize_target(double value, Target target);
std::string class_label(Target target, int cls);

// ---------------------------------------------------------------------------
// Features

enum class FeatureKind { Categorical, Continuous };

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
};

namespace feature {
// Slot indices of the feature vector, grouped as demographics (4), price
// history (19), time history (13), product history (4), cross-target (1)
// and contacts (14).
enum Index : std::size_t {
  Gender, Age, Zip, Income,
  LastPrice1, LastPrice2, LastPrice3,
  LastPriceClass1, LastPriceClass2, LastPriceClass3,
  NumPurchases, MeanPrice, MedianPrice, TotalSpent, PriceStd,
  PriceClassCount1, PriceClassCount2, PriceClassCount3, PriceClassCount4, PriceClassCount5,
  ModalPriceClass, ModalPriceClassCount, TotalPurchasesSoFar,
  LastGap1, LastGap2, LastGap3,
  MeanGap, MedianGap, GapStd,
  TimeClassCount1, TimeClassCount2, TimeClassCount3, TimeClassCount4, TimeClassCount5,
  ModalTimeClass, ModalTimeClassCount,
  LastCategory1, LastCategory2, LastCategory3, ModalCategory,
  CrossTarget,
  ContactPriceMean, ContactPriceMedian, ContactPriceStd, ContactPriceMin, ContactPriceMax,
  ContactPriceP10, ContactPriceP90,
  ContactGapMean, ContactGapMedian, ContactGapStd, ContactGapMin, ContactGapMax,
  ContactGapP10, ContactGapP90,
  Count
};
}  // namespace feature

inline constexpr std::size_t kFeatureCount = feature::Count;
static_assert(kFeatureCount == 55);

// Names differ only in the cross-target slot ("next_delay_days" when
// predicting price, "next_price" when predicting time).
const std::vector<FeatureSpec>& feature_specs(Target target);

using FeatureValue = std::optional<double>;  // nullopt = missing

struct FeatureVector {
  std::array<FeatureValue, kFeatureCount> values;

  const FeatureValue& operator[](std::size_t i) const { return values[i]; }
  FeatureValue& operator[](std::size_t i) { return values[i]; }
  bool operator==(const FeatureVector&) const = default;
};

// Prices are in dollars, delays in days. Categorical slots carry codes:
// gender 0 = female / 1 = male, classes 1..5, zip as its integer value, and
// category labels as a stable 48-bit hash of the level-1 label.
class FeatureExtractor {
 public:
  FeatureExtractor(const Dataset& dataset, const EmailGraph* graph);

  // History is every event of `user` strictly before `instant`; the next
  // purchase (for the cross-target slot) is the user's first event at or
  // after `instant`. Throws when there is no prior purchase.
  FeatureVector extract(Dataset::UserIndex user, Timestamp instant, Target target,
                        bool include_cross_target) const;

  // Same, with the next purchase given by its global event index.
  FeatureVector extract_for_event(std::size_t event_index, Target target, bool include_cross_target) const;

  const std::vector<Dataset::UserIndex>& contacts(Dataset::UserIndex user) const { return contacts_[user]; }

 private:
  FeatureVector build(Dataset::UserIndex user, std::size_t history_end, Timestamp instant,
                      const PurchaseEvent* next, Target target, bool include_cross_target) const;

  const Dataset& dataset_;
  std::vector<std::vector<Dataset::UserIndex>> contacts_;
};

FeatureVector extract_features(const Dataset& dataset, const EmailGraph* graph, Dataset::UserIndex user,
                               Timestamp instant, Target target, bool include_cross_target);

// One prediction instance per purchase that has at least one strictly
// earlier purchase by the same user.
struct Instance {
  Dataset::UserIndex user = 0;
  std::size_t event_index = 0;
  Timestamp instant = 0;
  int label = 0;
  int last_class = -1;       // class of the previous purchase (or gap); -1 if none
  int most_used_class = -1;  // modal class of the history; -1 if none
  FeatureVector features;
};

struct InstanceOptions {
  Target target = Target::Price;
  bool include_cross_target = true;
  Timestamp from = INT64_MIN;  // instants in [from, to)
  Timestamp to = INT64_MAX;
};

// Parallel over users; output is ordered by (user, event) like the serial
// reference.
std::vector<Instance> build_instances(const FeatureExtractor& extractor, const Dataset& dataset,
                                      const InstanceOptions& options);
std::vector<Instance> build_instances_serial(const FeatureExtractor& extractor, const Dataset& dataset,
                                             const InstanceOptions& options);

// ---------------------------------------------------------------------------
// Discretization

// Quantile edges at i/k (linear interpolation), deduplicated, keeping only
// edges strictly above the minimum. Throws on an empty column.
std::vector<double> fit_quantile_edges(std::span<const double> values, int k = 5);

// Bin 0 is always the missing bin.
struct FeatureBins {
  FeatureKind kind = FeatureKind::Continuous;
  std::vector<double> edges;   // continuous
  std::vector<double> values;  // categorical vocabulary, sorted

  int bin_count() const;
  // Continuous values below the first edge fall in bin 1, above the last in
  // the top bin. Unseen categorical values map to the missing bin.
  int bin_of(const FeatureValue& v) const;
};

FeatureBins fit_bins(FeatureKind kind, std::span<const double> values, int k = 5);

// Row-major matrix of bin indices with per-column cardinalities.
struct DiscreteMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> cardinality;
  std::vector<int> cells;

  int at(std::size_t r, std::size_t c) const { return cells[r * cols + c]; }
  std::span<const int> row(std::size_t r) const { return std::span<const int>(cells).subspan(r * cols, cols); }
};

// ---------------------------------------------------------------------------
// Naive-factorized Bayesian classifier over discrete features

struct Posterior {
  int predicted = 0;
  std::vector<double> probabilities;
};

struct NaiveBayes {
  double alpha = 0.5;
  int n_classes = kClassCount;
  std::vector<int> cardinality;
  std::vector<std::size_t> class_counts;
  std::vector<double> priors;                // (N_c + a) / (N + a K)
  std::vector<std::vector<double>> cpt;      // [feature][class * V_f + bin]
  std::vector<std::vector<double>> log_cpt;

  double conditional(std::size_t feature, int cls, int bin) const {
    return cpt[feature][static_cast<std::size_t>(cls * cardinality[feature] + bin)];
  }

  // Posterior proportional to prior times per-feature conditionals, computed
  // in log space and normalized; ties go to the lower class index.
  Posterior posterior(std::span<const int> bins) const;
};

// Parallel over features; bit-identical to the serial reference.
NaiveBayes fit_naive_bayes(const DiscreteMatrix& x, std::span<const int> labels, int n_classes, double alpha);
NaiveBayes fit_naive_bayes_serial(const DiscreteMatrix& x, std::span<const int> labels, int n_classes,
                                  double alpha);

// Full model: feature bins learned on the training set plus the classifier.
struct NBModel {
  Target target = Target::Price;
  std::vector<FeatureSpec> features;
  std::vector<FeatureBins> bins;
  NaiveBayes classifier;

  std::vector<int> discretize(const FeatureVector& fv) const;
  Posterior predict(const FeatureVector& fv) const;

  nlohmann::ordered_json to_json() const;
  static NBModel from_json(const nlohmann::json& j);
};

DiscreteMatrix discretize_all(const NBModel& model, std::span<const Instance> instances);

struct TrainOptions {
  double alpha = 0.5;
  int bins_per_feature = 5;
};

NBModel train(std::span<const Instance> instances, Target target, const TrainOptions& options = {});

// ---------------------------------------------------------------------------
// Baselines, metrics, evaluation

enum class Baseline { Majority, LastClass, MostUsedClass };

// `history` holds the classes of earlier purchases (or gaps), oldest first.
int baseline_predict(Baseline kind, std::span<const int> history, int training_majority);

// Modal class with ties toward the lower class; -1 for an empty history.
int most_used_class(std::span<const int> history);

double accuracy(std::span<const int> labels, std::span<const int> predicted);

// Area under the ROC curve with tied scores counted as one half.
double binary_auc(std::span<const double> scores, std::span<const char> positive);

// Sum over classes of prevalence(c) * one-vs-rest AUC(c); classes absent
// from `labels` carry no weight.
double weighted_auc(std::span<const int> labels, std::span<const std::vector<double>> posteriors, int n_classes);

// sqrt(mean over instances and classes of (posterior - one_hot)^2).
double posterior_rmse(std::span<const int> labels, std::span<const std::vector<double>> posteriors, int n_classes);

struct EvalReport {
  Target target = Target::Price;
  std::size_t n_test = 0;
  double majority_accuracy = 0.0;  // largest test-class share
  double last_class_accuracy = 0.0;
  double most_used_accuracy = 0.0;
  double accuracy = 0.0;
  double absolute_improvement = 0.0;
  double relative_improvement = 0.0;
  double weighted_auc = 0.0;
  double rmse = 0.0;
  int training_majority = 0;
};

EvalReport evaluate(const NBModel& model, std::span<const Instance> test, int training_majority);

// Columns: prediction,majority,last_used,most_used,classifier,
// absolute_improvement,relative_improvement,auc,rmse
void write_csv(std::ostream& out, const std::vector<EvalReport>& reports);

struct TemporalSplit {
  Timestamp train_start = 0;
  Timestamp train_end = 0;
  Timestamp test_end = 0;

  static TemporalSplit from_months(const Window& window, int train_months, int test_months);
};

int majority_class(std::span<const int> labels, int n_classes);

// ---------------------------------------------------------------------------
// Chi-squared ranking

// Sum of (O - E)^2 / E over cells with E > 0, E from the margins.
double chi2_statistic(const std::vector<std::vector<double>>& table);

struct Chi2Entry {
  std::string feature;
  double chi2 = 0.0;
};

// Descending by chi2, ties by feature name.
std::vector<Chi2Entry> chi2_rank(const DiscreteMatrix& x, std::span<const int> labels, int n_classes,
                                 std::span<const std::string> names);

void write_csv(std::ostream& out, const std::vector<Chi2Entry>& ranking);

}  // namespace buyflow::predict
