#include <algorithm>
#include <cmath>

#include "buyflow/common/error.hpp"
#include "buyflow/common/stats.hpp"
#include "buyflow/predictor.hpp"

namespace buyflow::predict {

namespace {

std::vector<FeatureSpec> make_specs(Target target) {
  using K = FeatureKind;
  std::vector<FeatureSpec> s = {
      {"gender", K::Categorical},
      {"age", K::Continuous},
      {"zip", K::Categorical},
      {"income", K::Continuous},
      {"last_price_1", K::Continuous},
      {"last_price_2", K::Continuous},
      {"last_price_3", K::Continuous},
      {"last_price_class_1", K::Categorical},
      {"last_price_class_2", K::Categorical},
      {"last_price_class_3", K::Categorical},
      {"num_purchases", K::Continuous},
      {"mean_price", K::Continuous},
      {"median_price", K::Continuous},
      {"total_spent", K::Continuous},
      {"price_std", K::Continuous},
      {"price_class_1_count", K::Continuous},
      {"price_class_2_count", K::Continuous},
      {"price_class_3_count", K::Continuous},
      {"price_class_4_count", K::Continuous},
      {"price_class_5_count", K::Continuous},
      {"modal_price_class", K::Categorical},
      {"modal_price_class_count", K::Continuous},
      {"total_purchases_so_far", K::Continuous},
      {"last_gap_1", K::Continuous},
      {"last_gap_2", K::Continuous},
      {"last_gap_3", K::Continuous},
      {"mean_gap", K::Continuous},
      {"median_gap", K::Continuous},
      {"gap_std", K::Continuous},
      {"time_class_1_count", K::Continuous},
      {"time_class_2_count", K::Continuous},
      {"time_class_3_count", K::Continuous},
      {"time_class_4_count", K::Continuous},
      {"time_class_5_count", K::Continuous},
      {"modal_time_class", K::Categorical},
      {"modal_time_class_count", K::Continuous},
      {"last_category_1", K::Categorical},
      {"last_category_2", K::Categorical},
      {"last_category_3", K::Categorical},
      {"modal_category", K::Categorical},
      {target == Target::Price ? "next_delay_days" : "next_price", K::Continuous},
  };
  for (const char* group : {"contact_price", "contact_gap"}) {
    for (const char* stat : {"mean", "median", "std", "min", "max", "p10", "p90"}) {
      s.push_back({std::string(group) + "_" + stat, K::Continuous});
    }
  }
  return s;
}

// FNV-1a truncated to 48 bits.
double label_code(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return static_cast<double>(h & ((1ULL << 48) - 1));
}

double dollars(std::int64_t cents) { return static_cast<double>(cents) / 100.0; }

double days(Timestamp a, Timestamp b) { return static_cast<double>(b - a) / static_cast<double>(kSecondsPerDay); }

void fill_summary(FeatureVector& fv, std::size_t first_slot, std::vector<double>& xs) {
  if (xs.empty()) return;
  std::ranges::sort(xs);
  fv[first_slot + 0] = stats::mean(xs);
  fv[first_slot + 1] = stats::quantile_sorted(xs, 0.5);
  fv[first_slot + 2] = stats::stddev_population(xs);
  fv[first_slot + 3] = xs.front();
  fv[first_slot + 4] = xs.back();
  fv[first_slot + 5] = stats::quantile_sorted(xs, 0.1);
  fv[first_slot + 6] = stats::quantile_sorted(xs, 0.9);
}

// Modal value of small non-negative codes with ties toward the lower code.
std::pair<int, std::size_t> modal(std::span<const std::size_t> counts) {
  int best = -1;
  std::size_t best_count = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > best_count) {
      best = static_cast<int>(c);
      best_count = counts[c];
    }
  }
  return {best, best_count};
}

}  // namespace

const std::vector<FeatureSpec>& feature_specs(Target target) {
  static const std::vector<FeatureSpec> price = make_specs(Target::Price);
  static const std::vector<FeatureSpec> time = make_specs(Target::Time);
  return target == Target::Price ? price : time;
}

FeatureExtractor::FeatureExtractor(const Dataset& dataset, const EmailGraph* graph)
    : dataset_(dataset), contacts_(dataset.user_count()) {
  if (!graph) return;
  for (Dataset::UserIndex u = 0; u < dataset.user_count(); ++u) {
    const auto node = graph->node(dataset.profile(u).user_id);
    if (!node) continue;
    for (auto n : graph->neighbors(*node)) {
      if (auto v = dataset.index_of(graph->name(n))) contacts_[u].push_back(*v);
    }
    std::ranges::sort(contacts_[u]);
  }
}

FeatureVector FeatureExtractor::extract(Dataset::UserIndex user, Timestamp instant, Target target,
                                        bool include_cross_target) const {
  const auto events = dataset_.events_of(user);
  const auto it = std::ranges::lower_bound(events, instant, {}, &PurchaseEvent::timestamp);
  const auto history_end = static_cast<std::size_t>(it - events.begin());
  const PurchaseEvent* next = it == events.end() ? nullptr : &*it;
  return build(user, history_end, instant, next, target, include_cross_target);
}

FeatureVector FeatureExtractor::extract_for_event(std::size_t event_index, Target target,
                                                  bool include_cross_target) const {
  const auto& e = dataset_.events()[event_index];
  const auto user = *dataset_.index_of(e.user_id);
  const auto events = dataset_.events_of(user);
  const auto it = std::ranges::lower_bound(events, e.timestamp, {}, &PurchaseEvent::timestamp);
  return build(user, static_cast<std::size_t>(it - events.begin()), e.timestamp, &e, target,
               include_cross_target);
}

FeatureVector FeatureExtractor::build(Dataset::UserIndex user, std::size_t history_end, Timestamp instant,
                                      const PurchaseEvent* next, Target target,
                                      bool include_cross_target) const {
  namespace f = feature;
  if (history_end == 0) {
    throw Error("user " + dataset_.profile(user).user_id + " has no purchase before the prediction instant");
  }
  const auto history = dataset_.events_of(user).first(history_end);
  const std::size_t base = dataset_.first_event(user);
  FeatureVector fv;

  const auto& p = dataset_.profile(user);
  if (p.gender != buyflow::Gender::Unknown) fv[f::Gender] = p.gender == buyflow::Gender::Female ? 0.0 : 1.0;
  if (p.age) fv[f::Age] = *p.age;
  if (p.zip) fv[f::Zip] = std::stod(*p.zip);
  if (p.income_cents) fv[f::Income] = dollars(*p.income_cents);

  // Price history.
  std::vector<double> prices;
  std::array<std::size_t, kClassCount> price_counts{};
  std::int64_t total = 0;
  for (const auto& e : history) {
    prices.push_back(dollars(e.price_cents));
    ++price_counts[static_cast<std::size_t>(price_class(e.price_cents))];
    total += e.price_cents;
  }
  const std::size_t n = history.size();
  for (std::size_t k = 0; k < 3 && k < n; ++k) {
    const auto& e = history[n - 1 - k];
    fv[f::LastPrice1 + k] = dollars(e.price_cents);
    fv[f::LastPriceClass1 + k] = price_class(e.price_cents) + 1;
  }
  fv[f::NumPurchases] = static_cast<double>(n);
  fv[f::MeanPrice] = stats::mean(prices);
  fv[f::MedianPrice] = stats::median(prices);
  fv[f::TotalSpent] = dollars(total);
  fv[f::PriceStd] = stats::stddev_population(prices);
  for (std::size_t c = 0; c < kClassCount; ++c) fv[f::PriceClassCount1 + c] = static_cast<double>(price_counts[c]);
  const auto [modal_price, modal_price_count] = modal(price_counts);
  fv[f::ModalPriceClass] = modal_price + 1;
  fv[f::ModalPriceClassCount] = static_cast<double>(modal_price_count);
  fv[f::TotalPurchasesSoFar] = static_cast<double>(n);

  // Time history: gaps between consecutive earlier purchases.
  std::vector<double> gaps;
  std::array<std::size_t, kClassCount> time_counts{};
  for (std::size_t i = 1; i < n; ++i) {
    const double g = days(history[i - 1].timestamp, history[i].timestamp);
    gaps.push_back(g);
    ++time_counts[static_cast<std::size_t>(time_class(g))];
  }
  for (std::size_t k = 0; k < 3 && k < gaps.size(); ++k) fv[f::LastGap1 + k] = gaps[gaps.size() - 1 - k];
  if (!gaps.empty()) {
    fv[f::MeanGap] = stats::mean(gaps);
    fv[f::MedianGap] = stats::median(gaps);
    fv[f::GapStd] = stats::stddev_population(gaps);
    const auto [modal_time, modal_time_count] = modal(time_counts);
    fv[f::ModalTimeClass] = modal_time + 1;
    fv[f::ModalTimeClassCount] = static_cast<double>(modal_time_count);
  }
  for (std::size_t c = 0; c < kClassCount; ++c) fv[f::TimeClassCount1 + c] = static_cast<double>(time_counts[c]);

  // Product history at taxonomy level 1.
  std::vector<std::int32_t> cats;
  for (std::size_t k = 0; k < n; ++k) {
    const auto id = dataset_.category_id(base + (n - 1 - k), 1);
    if (id == Dataset::kUnknownCategory) continue;
    if (k < 3) fv[f::LastCategory1 + k] = label_code(dataset_.category_label(1, id));
    cats.push_back(id);
  }
  if (!cats.empty()) {
    std::ranges::sort(cats);
    std::int32_t best = cats.front();
    std::size_t best_run = 0;
    for (std::size_t i = 0; i < cats.size();) {
      std::size_t j = i;
      while (j < cats.size() && cats[j] == cats[i]) ++j;
      if (j - i > best_run) {
        best_run = j - i;
        best = cats[i];
      }
      i = j;
    }
    fv[f::ModalCategory] = label_code(dataset_.category_label(1, best));
  }

  if (include_cross_target && next) {
    if (target == Target::Price) {
      fv[f::CrossTarget] = days(history.back().timestamp, next->timestamp);
    } else {
      fv[f::CrossTarget] = dollars(next->price_cents);
    }
  }

  // Contacts: purchases of first-level contacts strictly before the instant.
  std::vector<double> contact_prices, contact_gaps;
  for (auto c : contacts_[user]) {
    const auto ce = dataset_.events_of(c);
    const auto end = std::ranges::lower_bound(ce, instant, {}, &PurchaseEvent::timestamp);
    for (auto it = ce.begin(); it != end; ++it) {
      contact_prices.push_back(dollars(it->price_cents));
      if (it != ce.begin()) contact_gaps.push_back(days((it - 1)->timestamp, it->timestamp));
    }
  }
  fill_summary(fv, f::ContactPriceMean, contact_prices);
  fill_summary(fv, f::ContactGapMean, contact_gaps);
  return fv;
}

FeatureVector extract_features(const Dataset& dataset, const EmailGraph* graph, Dataset::UserIndex user,
                               Timestamp instant, Target target, bool include_cross_target) {
  return FeatureExtractor(dataset, graph).extract(user, instant, target, include_cross_target);
}

namespace {

void user_instances(const FeatureExtractor& extractor, const Dataset& ds, Dataset::UserIndex u,
                    const InstanceOptions& options, std::vector<Instance>& out) {
  const auto events = ds.events_of(u);
  const std::size_t base = ds.first_event(u);
  std::vector<int> history_classes;
  std::size_t history_end = 0;  // events [0, history_end) are strictly earlier
  for (std::size_t i = 1; i < events.size(); ++i) {
    while (history_end < i && events[history_end].timestamp < events[i].timestamp) ++history_end;
    if (history_end == 0) continue;
    const Timestamp t = events[i].timestamp;
    if (t < options.from || t >= options.to) continue;

    Instance inst;
    inst.user = u;
    inst.event_index = base + i;
    inst.instant = t;
    const auto& last = events[history_end - 1];
    if (options.target == Target::Price) {
      inst.label = price_class(events[i].price_cents);
      history_classes.clear();
      for (std::size_t k = 0; k < history_end; ++k) history_classes.push_back(price_class(events[k].price_cents));
    } else {
      inst.label = time_class(days(last.timestamp, t));
      history_classes.clear();
      for (std::size_t k = 1; k < history_end; ++k) {
        history_classes.push_back(time_class(days(events[k - 1].timestamp, events[k].timestamp)));
      }
    }
    inst.last_class = history_classes.empty() ? -1 : history_classes.back();
    inst.most_used_class = most_used_class(history_classes);
    inst.features = extractor.extract_for_event(base + i, options.target, options.include_cross_target);
    out.push_back(std::move(inst));
  }
}

}  // namespace

std::vector<Instance> build_instances_serial(const FeatureExtractor& extractor, const Dataset& dataset,
                                             const InstanceOptions& options) {
  std::vector<Instance> out;
  for (Dataset::UserIndex u = 0; u < dataset.user_count(); ++u) user_instances(extractor, dataset, u, options, out);
  return out;
}

std::vector<Instance> build_instances(const FeatureExtractor& extractor, const Dataset& dataset,
                                      const InstanceOptions& options) {
  const auto n_users = static_cast<std::int64_t>(dataset.user_count());
  std::vector<std::vector<Instance>> per_user(dataset.user_count());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t u = 0; u < n_users; ++u) {
    user_instances(extractor, dataset, static_cast<Dataset::UserIndex>(u), options,
                   per_user[static_cast<std::size_t>(u)]);
  }
  std::size_t total = 0;
  for (const auto& v : per_user) total += v.size();
  std::vector<Instance> out;
  out.reserve(total);
  for (auto& v : per_user) std::ranges::move(v, std::back_inserter(out));
  return out;
}

}  // namespace buyflow::predict
