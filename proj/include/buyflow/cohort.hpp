#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "buyflow/datastore.hpp"

namespace buyflow::cohort {

// Contiguous age bands. Band i covers [lower[i], lower[i+1]); the last band
// ends at `max_age` inclusive. Ages outside every band go to "other".
struct AgeBuckets {
  std::vector<int> lower;
  int max_age = 80;

  static AgeBuckets five_year();  // 18-22, 23-27, ..., 78-80
  std::string label(std::optional<int> age) const;
  void validate() const;
};

struct GroupStats {
  std::string key;
  std::size_t population = 0;
  std::size_t shoppers = 0;
  double shopper_fraction = 0.0;
  std::size_t purchases = 0;
  double purchases_per_shopper = 0.0;
  double mean_price_cents = 0.0;
  std::int64_t total_spend_cents = 0;
};

struct Grouping {
  enum class Kind { GenderAge, Income };
  Kind kind = Kind::GenderAge;
  AgeBuckets ages = AgeBuckets::five_year();
  int income_buckets = 5;
};

// One row per non-empty group; every user of the dataset (the population)
// lands in exactly one group, so counts add up to the dataset totals.
// Income groups are equal-population quantile buckets; users without a
// joined income form their own "income unknown" group.
std::vector<GroupStats> group_stats(const Dataset& dataset, const Grouping& grouping);

void write_csv(std::ostream& out, const std::vector<GroupStats>& rows);

struct UserGroup {
  std::string label;
  std::optional<Gender> gender;
  std::optional<int> min_age;  // inclusive
  std::optional<int> max_age;  // inclusive

  bool contains(const UserProfile& p) const;
};

struct CategoryDiff {
  std::string category;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  double share_a = 0.0;
  double share_b = 0.0;
  double diff = 0.0;     // share_a - share_b
  double z = 0.0;        // pooled two-proportion z statistic
  double p_value = 1.0;  // two-sided
};

struct DistinctiveResult {
  std::vector<CategoryDiff> top;     // largest diff first
  std::vector<CategoryDiff> bottom;  // smallest diff first
  std::vector<CategoryDiff> all;     // every category, sorted by diff descending
};

// Shares are taken over all purchases of each group (uncategorized included
// in the denominator).
DistinctiveResult distinctive_categories(const Dataset& dataset, const UserGroup& a,
                                         const UserGroup& b, int level, std::size_t top_k);

void write_csv(std::ostream& out, const DistinctiveResult& result);

enum class Metric { PurchasesPerUser, SpendPerUser, PurchasesPerItem };

struct ValueMass {
  double value = 0.0;
  double pdf = 0.0;
  double cdf = 0.0;
};

struct LogBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double pdf = 0.0;      // probability mass of the bin
  double density = 0.0;  // pdf / (hi - lo)
  double cdf = 0.0;
};

struct Distribution {
  std::vector<double> sorted_values;
  std::vector<ValueMass> exact;  // per distinct value
  std::vector<LogBin> bins;      // log-spaced

  double percentile(double q) const;
};

Distribution distribution(const Dataset& dataset, Metric metric, int bins_per_decade = 5);

void write_csv(std::ostream& out, const Distribution& dist);

struct PriceBin {
  double lo_cents = 0.0;
  double hi_cents = 0.0;
  std::size_t items = 0;
  double mean_purchases = 0.0;
};

struct PricePopularity {
  std::vector<PriceBin> bins;
  std::size_t items = 0;
  double spearman = 0.0;  // over items: (price, times purchased)
};

// Item price is the median price paid for the item.
PricePopularity price_popularity(const Dataset& dataset, int n_price_bins);

void write_csv(std::ostream& out, const PricePopularity& result);

}  // namespace buyflow::cohort
