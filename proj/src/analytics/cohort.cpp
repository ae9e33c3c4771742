#include "buyflow/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"
#include "buyflow/common/stats.hpp"

namespace buyflow::cohort {

AgeBuckets AgeBuckets::five_year() {
  AgeBuckets b;
  for (int age = 18; age <= 78; age += 5) b.lower.push_back(age);
  b.max_age = 80;
  return b;
}

void AgeBuckets::validate() const {
  if (lower.empty()) throw Error("age buckets are empty");
  for (std::size_t i = 1; i < lower.size(); ++i) {
    if (lower[i] <= lower[i - 1]) throw Error("age buckets must be strictly increasing");
  }
  if (max_age < lower.back()) throw Error("last age bucket ends before it starts");
}

std::string AgeBuckets::label(std::optional<int> age) const {
  if (!age || *age < lower.front() || *age > max_age) return "other";
  const auto it = std::upper_bound(lower.begin(), lower.end(), *age);
  const auto i = static_cast<std::size_t>(it - lower.begin()) - 1;
  const int hi = i + 1 < lower.size() ? lower[i + 1] - 1 : max_age;
  return std::to_string(lower[i]) + "-" + std::to_string(hi);
}

namespace {

struct Accumulator {
  std::size_t population = 0;
  std::size_t shoppers = 0;
  std::size_t purchases = 0;
  std::int64_t spend = 0;
};

GroupStats finish(const std::string& key, const Accumulator& a) {
  GroupStats g;
  g.key = key;
  g.population = a.population;
  g.shoppers = a.shoppers;
  g.shopper_fraction = a.population ? static_cast<double>(a.shoppers) / static_cast<double>(a.population) : 0.0;
  g.purchases = a.purchases;
  g.purchases_per_shopper = a.shoppers ? static_cast<double>(a.purchases) / static_cast<double>(a.shoppers) : 0.0;
  g.mean_price_cents = a.purchases ? static_cast<double>(a.spend) / static_cast<double>(a.purchases) : 0.0;
  g.total_spend_cents = a.spend;
  return g;
}

void add_user(Accumulator& acc, const Dataset& ds, Dataset::UserIndex u) {
  ++acc.population;
  const auto events = ds.events_of(u);
  if (events.empty()) return;
  ++acc.shoppers;
  acc.purchases += events.size();
  for (const auto& e : events) acc.spend += e.price_cents;
}

}  // namespace

std::vector<GroupStats> group_stats(const Dataset& ds, const Grouping& grouping) {
  std::vector<GroupStats> out;
  if (grouping.kind == Grouping::Kind::GenderAge) {
    grouping.ages.validate();
    // Keyed by (gender, first bucket age) so rows come out in natural order.
    std::map<std::pair<int, int>, std::pair<std::string, Accumulator>> groups;
    for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
      const auto& p = ds.profile(u);
      const std::string band = grouping.ages.label(p.age);
      const int order = band == "other" ? 1000 : std::stoi(band);
      auto& slot = groups[{static_cast<int>(p.gender), order}];
      slot.first = std::string(gender_name(p.gender)) + "|" + band;
      add_user(slot.second, ds, u);
    }
    for (const auto& [k, v] : groups) out.push_back(finish(v.first, v.second));
    return out;
  }

  if (grouping.income_buckets < 1) throw Error("income grouping needs at least one bucket");
  std::vector<Dataset::UserIndex> with_income;
  Accumulator unknown;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    if (ds.profile(u).income_cents) {
      with_income.push_back(u);
    } else {
      add_user(unknown, ds, u);
    }
  }
  if (with_income.empty()) throw Error("income grouping requires profiles joined with income");
  std::ranges::stable_sort(with_income, [&](auto a, auto b) {
    return *ds.profile(a).income_cents < *ds.profile(b).income_cents;
  });
  const std::size_t n = with_income.size();
  const auto k = static_cast<std::size_t>(grouping.income_buckets);
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t lo = b * n / k;
    const std::size_t hi = (b + 1) * n / k;
    if (lo == hi) continue;
    Accumulator acc;
    for (std::size_t i = lo; i < hi; ++i) add_user(acc, ds, with_income[i]);
    const auto lo_usd = *ds.profile(with_income[lo]).income_cents / 100;
    const auto hi_usd = *ds.profile(with_income[hi - 1]).income_cents / 100;
    out.push_back(finish("income_q" + std::to_string(b + 1) + " [" + std::to_string(lo_usd) + "-" +
                             std::to_string(hi_usd) + "]",
                         acc));
  }
  if (unknown.population) out.push_back(finish("income_unknown", unknown));
  return out;
}

void write_csv(std::ostream& out, const std::vector<GroupStats>& rows) {
  out << "group,population,shoppers,shopper_fraction,purchases,purchases_per_shopper,mean_price_cents,"
         "total_spend_cents\n";
  for (const auto& g : rows) {
    csv::write_row(out, {g.key, std::to_string(g.population), std::to_string(g.shoppers),
                         csv::num(g.shopper_fraction), std::to_string(g.purchases),
                         csv::num(g.purchases_per_shopper), csv::num(g.mean_price_cents),
                         std::to_string(g.total_spend_cents)});
  }
}

bool UserGroup::contains(const UserProfile& p) const {
  if (gender && p.gender != *gender) return false;
  if (min_age || max_age) {
    if (!p.age) return false;
    if (min_age && *p.age < *min_age) return false;
    if (max_age && *p.age > *max_age) return false;
  }
  return true;
}

DistinctiveResult distinctive_categories(const Dataset& ds, const UserGroup& a, const UserGroup& b,
                                         int level, std::size_t top_k) {
  if (level < 1 || level > 3) throw Error("unknown category level " + std::to_string(level));
  const std::size_t n_cat = ds.category_count(level);
  std::vector<std::size_t> count_a(n_cat, 0), count_b(n_cat, 0);
  std::size_t total_a = 0, total_b = 0;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    const bool in_a = a.contains(ds.profile(u));
    const bool in_b = b.contains(ds.profile(u));
    if (!in_a && !in_b) continue;
    for (std::size_t i = ds.first_event(u); i < ds.first_event(u) + ds.event_count(u); ++i) {
      const auto c = ds.category_id(i, level);
      if (in_a) {
        ++total_a;
        if (c >= 0) ++count_a[static_cast<std::size_t>(c)];
      }
      if (in_b) {
        ++total_b;
        if (c >= 0) ++count_b[static_cast<std::size_t>(c)];
      }
    }
  }
  if (total_a == 0) throw Error("group '" + a.label + "' has no purchases");
  if (total_b == 0) throw Error("group '" + b.label + "' has no purchases");

  DistinctiveResult result;
  const double na = static_cast<double>(total_a);
  const double nb = static_cast<double>(total_b);
  for (std::size_t c = 0; c < n_cat; ++c) {
    if (count_a[c] == 0 && count_b[c] == 0) continue;
    CategoryDiff d;
    d.category = ds.category_label(level, static_cast<std::int32_t>(c));
    d.count_a = count_a[c];
    d.count_b = count_b[c];
    d.share_a = static_cast<double>(count_a[c]) / na;
    d.share_b = static_cast<double>(count_b[c]) / nb;
    d.diff = d.share_a - d.share_b;
    const double pooled = static_cast<double>(count_a[c] + count_b[c]) / (na + nb);
    const double se = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
    d.z = se > 0.0 ? d.diff / se : 0.0;
    d.p_value = se > 0.0 ? stats::normal_two_sided_p(d.z) : 1.0;
    result.all.push_back(std::move(d));
  }
  std::ranges::stable_sort(result.all, [](const CategoryDiff& x, const CategoryDiff& y) {
    if (x.diff != y.diff) return x.diff > y.diff;
    return x.category < y.category;
  });
  const std::size_t k = std::min(top_k, result.all.size());
  result.top.assign(result.all.begin(), result.all.begin() + static_cast<std::ptrdiff_t>(k));
  result.bottom.assign(result.all.rbegin(), result.all.rbegin() + static_cast<std::ptrdiff_t>(k));
  return result;
}

void write_csv(std::ostream& out, const DistinctiveResult& result) {
  out << "side,rank,category,count_a,count_b,share_a,share_b,diff,z,p_value\n";
  const auto emit = [&](std::string_view side, const std::vector<CategoryDiff>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& d = rows[i];
      csv::write_row(out, {std::string(side), std::to_string(i + 1), d.category, std::to_string(d.count_a),
                           std::to_string(d.count_b), csv::num(d.share_a), csv::num(d.share_b),
                           csv::num(d.diff), csv::num(d.z), csv::num(d.p_value)});
    }
  };
  emit("a", result.top);
  emit("b", result.bottom);
}

double Distribution::percentile(double q) const { return stats::quantile_sorted(sorted_values, q); }

namespace {

std::vector<LogBin> log_bins(const std::vector<double>& sorted, int per_decade) {
  std::vector<LogBin> bins;
  if (sorted.empty()) return bins;
  const auto first_pos = std::ranges::upper_bound(sorted, 0.0);
  const auto zeros = static_cast<std::size_t>(first_pos - sorted.begin());
  std::vector<double> edges;
  if (first_pos != sorted.end()) {
    const auto edge = [&](long k) { return std::pow(10.0, static_cast<double>(k) / per_decade); };
    long k_lo = static_cast<long>(std::floor(std::log10(*first_pos) * per_decade));
    long k_hi = static_cast<long>(std::floor(std::log10(sorted.back()) * per_decade)) + 1;
    while (edge(k_lo) > *first_pos) --k_lo;
    while (edge(k_hi) <= sorted.back()) ++k_hi;
    for (long k = k_lo; k <= k_hi; ++k) edges.push_back(edge(k));
  }
  const double n = static_cast<double>(sorted.size());
  if (zeros) {
    LogBin z;
    z.lo = 0.0;
    z.hi = edges.empty() ? 1.0 : edges.front();
    z.count = zeros;
    bins.push_back(z);
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    LogBin b;
    b.lo = edges[i];
    b.hi = edges[i + 1];
    const auto from = std::ranges::lower_bound(sorted, b.lo);
    const auto to = std::ranges::lower_bound(sorted, b.hi);
    b.count = static_cast<std::size_t>(to - from);
    bins.push_back(b);
  }
  double cum = 0.0;
  for (auto& b : bins) {
    b.pdf = static_cast<double>(b.count) / n;
    b.density = b.hi > b.lo ? b.pdf / (b.hi - b.lo) : 0.0;
    cum += b.pdf;
    b.cdf = cum;
  }
  if (!bins.empty()) bins.back().cdf = 1.0;
  return bins;
}

}  // namespace

Distribution distribution(const Dataset& ds, Metric metric, int bins_per_decade) {
  if (bins_per_decade < 1) throw Error("bins_per_decade must be positive");
  std::vector<double> values;
  switch (metric) {
    case Metric::PurchasesPerUser:
    case Metric::SpendPerUser:
      for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
        const auto events = ds.events_of(u);
        if (events.empty()) continue;
        if (metric == Metric::PurchasesPerUser) {
          values.push_back(static_cast<double>(events.size()));
        } else {
          std::int64_t spend = 0;
          for (const auto& e : events) spend += e.price_cents;
          values.push_back(static_cast<double>(spend));
        }
      }
      break;
    case Metric::PurchasesPerItem: {
      std::unordered_map<std::string, std::size_t> per_item;
      for (const auto& e : ds.events()) ++per_item[e.item_id];
      for (const auto& [item, n] : per_item) values.push_back(static_cast<double>(n));
      break;
    }
  }
  if (values.empty()) throw Error("distribution of an empty dataset");
  std::ranges::sort(values);

  Distribution d;
  const double n = static_cast<double>(values.size());
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    ValueMass m;
    m.value = values[i];
    m.pdf = static_cast<double>(j - i) / n;
    m.cdf = static_cast<double>(j) / n;
    d.exact.push_back(m);
    i = j;
  }
  d.bins = log_bins(values, bins_per_decade);
  d.sorted_values = std::move(values);
  return d;
}

void write_csv(std::ostream& out, const Distribution& dist) {
  out << "bin_lo,bin_hi,count,pdf,density,cdf\n";
  for (const auto& b : dist.bins) {
    csv::write_row(out, {csv::num(b.lo), csv::num(b.hi), std::to_string(b.count), csv::num(b.pdf),
                         csv::num(b.density), csv::num(b.cdf)});
  }
}

PricePopularity price_popularity(const Dataset& ds, int n_price_bins) {
  if (n_price_bins < 1) throw Error("price_popularity needs at least one bin");
  std::map<std::string, std::vector<double>> prices_by_item;
  for (const auto& e : ds.events()) prices_by_item[e.item_id].push_back(static_cast<double>(e.price_cents));

  std::vector<double> price, count;
  for (auto& [item, prices] : prices_by_item) {
    price.push_back(stats::median(prices));
    count.push_back(static_cast<double>(prices.size()));
  }
  PricePopularity result;
  result.items = price.size();
  if (price.empty()) return result;
  result.spearman = stats::spearman(price, count);

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double p : price) {
    if (p > 0.0) lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  if (!std::isfinite(lo)) lo = hi = 1.0;
  const double log_lo = std::log(lo);
  const double span = std::max(std::log(hi) - log_lo, 1e-12);
  result.bins.resize(static_cast<std::size_t>(n_price_bins));
  for (int b = 0; b < n_price_bins; ++b) {
    auto& bin = result.bins[static_cast<std::size_t>(b)];
    bin.lo_cents = std::exp(log_lo + span * b / n_price_bins);
    bin.hi_cents = std::exp(log_lo + span * (b + 1) / n_price_bins);
  }
  std::vector<double> sums(result.bins.size(), 0.0);
  for (std::size_t i = 0; i < price.size(); ++i) {
    std::size_t b = 0;
    if (price[i] > 0.0) {
      const double pos = (std::log(price[i]) - log_lo) / span * n_price_bins;
      b = std::min(static_cast<std::size_t>(std::max(pos, 0.0)), result.bins.size() - 1);
    }
    ++result.bins[b].items;
    sums[b] += count[i];
  }
  for (std::size_t b = 0; b < result.bins.size(); ++b) {
    if (result.bins[b].items) result.bins[b].mean_purchases = sums[b] / static_cast<double>(result.bins[b].items);
  }
  return result;
}

void write_csv(std::ostream& out, const PricePopularity& result) {
  out << "price_lo_cents,price_hi_cents,items,mean_purchases\n";
  for (const auto& b : result.bins) {
    csv::write_row(out, {csv::num(b.lo_cents), csv::num(b.hi_cents), std::to_string(b.items),
                         csv::num(b.mean_purchases)});
  }
  out << "# spearman," << csv::num(result.spearman) << '\n';
}

}  // namespace buyflow::cohort
