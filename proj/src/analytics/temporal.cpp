#include "buyflow/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"
#include "buyflow/common/rng.hpp"
#include "buyflow/common/stats.hpp"

namespace buyflow::temporal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double days_between(Timestamp a, Timestamp b) {
  return static_cast<double>(b - a) / static_cast<double>(kSecondsPerDay);
}

double ratio(double num, double den) { return den > 0.0 ? num / den : kNaN; }

}  // namespace

int LocalClock::offset_minutes(const UserProfile& profile) const {
  if (!zones_ || !profile.zip) return 0;
  auto it = zones_->find(*profile.zip);
  return it == zones_->end() ? 0 : it->second;
}

ActivityProfile activity_profile(const Dataset& ds, Granularity granularity, const LocalClock& clock) {
  ActivityProfile p;
  p.granularity = granularity;
  const std::size_t slots = granularity == Granularity::DayOfWeek ? 7 : 24;
  p.counts.assign(slots, 0);
  p.spend_cents.assign(slots, 0);
  std::size_t monday_events = 0, sunday_events = 0;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    for (const auto& e : ds.events_of(u)) {
      const Timestamp local = clock.local(ds.profile(u), e.timestamp);
      const std::int64_t day = day_number(local);
      const int wd = weekday_of_day(day);
      if (wd == 0) ++monday_events;
      if (wd == 6) ++sunday_events;
      const std::size_t slot = granularity == Granularity::DayOfWeek
                                   ? static_cast<std::size_t>(wd)
                                   : static_cast<std::size_t>((local - day * kSecondsPerDay) / 3600);
      ++p.counts[slot];
      p.spend_cents[slot] += e.price_cents;
    }
  }
  const auto& w = ds.window();
  if (w.end > w.start) {
    for (std::int64_t d = day_number(w.start); d <= day_number(w.end - 1); ++d) {
      const int wd = weekday_of_day(d);
      if (wd == 0) ++p.mondays;
      if (wd == 6) ++p.sundays;
    }
  }
  p.monday_sunday_ratio =
      p.mondays && p.sundays
          ? ratio(static_cast<double>(monday_events) / static_cast<double>(p.mondays),
                  static_cast<double>(sunday_events) / static_cast<double>(p.sundays))
          : kNaN;
  return p;
}

void write_csv(std::ostream& out, const ActivityProfile& p) {
  static constexpr const char* kDays[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  out << "slot,count,spend_cents\n";
  for (std::size_t i = 0; i < p.counts.size(); ++i) {
    const std::string slot = p.granularity == Granularity::DayOfWeek ? kDays[i] : std::to_string(i);
    csv::write_row(out, {slot, std::to_string(p.counts[i]), std::to_string(p.spend_cents[i])});
  }
  out << "# monday_sunday_ratio," << csv::num(p.monday_sunday_ratio) << '\n';
}

std::vector<MonthBoundaryRow> month_boundary_test(const Dataset& ds, const LocalClock& clock) {
  std::vector<MonthBoundaryRow> rows;
  const auto& w = ds.window();
  if (w.end <= w.start) return rows;

  // Per local calendar day: (count, spend).
  std::map<std::int64_t, std::pair<std::size_t, std::int64_t>> per_day;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    for (const auto& e : ds.events_of(u)) {
      auto& slot = per_day[day_number(clock.local(ds.profile(u), e.timestamp))];
      ++slot.first;
      slot.second += e.price_cents;
    }
  }

  Timestamp m = month_start(w.start);
  if (m < w.start) m = add_months(m, 1);
  for (; add_months(m, 1) <= w.end; m = add_months(m, 1)) {
    const Timestamp next = add_months(m, 1);
    std::int64_t first = -1, last = -1;
    for (std::int64_t d = day_number(m); d < day_number(next); ++d) {
      if (weekday_of_day(d) != 0) continue;
      if (first < 0) first = d;
      last = d;
    }
    MonthBoundaryRow row;
    const CivilDate c = to_civil(m);
    row.year = c.year;
    row.month = c.month;
    if (auto it = per_day.find(first); it != per_day.end()) {
      row.first_monday_count = it->second.first;
      row.first_monday_spend = it->second.second;
    }
    if (auto it = per_day.find(last); it != per_day.end()) {
      row.last_monday_count = it->second.first;
      row.last_monday_spend = it->second.second;
    }
    row.spend_ratio = ratio(static_cast<double>(row.first_monday_spend), static_cast<double>(row.last_monday_spend));
    row.count_ratio = ratio(static_cast<double>(row.first_monday_count), static_cast<double>(row.last_monday_count));
    rows.push_back(row);
  }
  return rows;
}

double mean_spend_ratio(const std::vector<MonthBoundaryRow>& rows) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (std::isfinite(r.spend_ratio)) {
      sum += r.spend_ratio;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kNaN;
}

void write_csv(std::ostream& out, const std::vector<MonthBoundaryRow>& rows) {
  out << "year,month,first_monday_count,last_monday_count,first_monday_spend_cents,"
         "last_monday_spend_cents,spend_ratio,count_ratio\n";
  for (const auto& r : rows) {
    csv::write_row(out, {std::to_string(r.year), std::to_string(r.month), std::to_string(r.first_monday_count),
                         std::to_string(r.last_monday_count), std::to_string(r.first_monday_spend),
                         std::to_string(r.last_monday_spend), csv::num(r.spend_ratio),
                         csv::num(r.count_ratio)});
  }
}

std::vector<RecurringItem> recurring_items(const Dataset& ds, std::size_t top_k) {
  struct Acc {
    std::string name;
    std::size_t purchases = 0;
    std::size_t users = 0;
    std::vector<double> gaps;
  };
  std::map<std::string, Acc> items;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    std::map<std::string, std::vector<const PurchaseEvent*>> by_item;
    for (const auto& e : ds.events_of(u)) by_item[e.item_id].push_back(&e);
    for (const auto& [item, events] : by_item) {
      if (events.size() < 2) continue;
      auto& acc = items[item];
      acc.name = events.front()->item_name;
      acc.purchases += events.size();
      ++acc.users;
      for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i]->timestamp == events[i - 1]->timestamp) continue;
        acc.gaps.push_back(days_between(events[i - 1]->timestamp, events[i]->timestamp));
      }
    }
  }
  std::vector<RecurringItem> out;
  for (auto& [item, acc] : items) {
    if (acc.gaps.empty()) continue;
    out.push_back({item, acc.name, acc.purchases, acc.users, stats::median(acc.gaps)});
  }
  std::ranges::stable_sort(out, [](const RecurringItem& a, const RecurringItem& b) {
    return a.purchases > b.purchases;
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

void write_csv(std::ostream& out, const std::vector<RecurringItem>& items) {
  out << "rank,item_id,item_name,purchases,users,median_delay_days\n";
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& r = items[i];
    csv::write_row(out, {std::to_string(i + 1), r.item_id, r.item_name, std::to_string(r.purchases),
                         std::to_string(r.users), csv::num(r.median_delay_days)});
  }
}

std::vector<std::size_t> DelayDistribution::local_maxima() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k + 1 < pdf.size(); ++k) {
    if (pdf[k] > pdf[k - 1] && pdf[k] > pdf[k + 1]) out.push_back(k);
  }
  return out;
}

DelayDistribution delay_distribution(const Dataset& ds) {
  DelayDistribution d;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    const auto events = ds.events_of(u);
    for (std::size_t i = 1; i < events.size(); ++i) {
      d.delays_days.push_back(days_between(events[i - 1].timestamp, events[i].timestamp));
    }
  }
  if (d.delays_days.empty()) return d;
  for (double delay : d.delays_days) {
    const auto k = static_cast<std::size_t>(std::floor(delay + 0.5));
    if (k >= d.pdf.size()) d.pdf.resize(k + 1, 0.0);
    d.pdf[k] += 1.0;
  }
  const double n = static_cast<double>(d.delays_days.size());
  for (double& v : d.pdf) v /= n;
  return d;
}

void write_csv(std::ostream& out, const DelayDistribution& dist) {
  out << "delay_days,pdf\n";
  for (std::size_t k = 0; k < dist.pdf.size(); ++k) {
    csv::write_row(out, {std::to_string(k), csv::num(dist.pdf[k])});
  }
}

BudgetCurve budget_curve(const Dataset& ds, const BudgetOptions& options) {
  BudgetCurve curve;
  std::map<std::int64_t, std::vector<double>> by_day;
  std::vector<double> xs, ys;
  std::vector<std::int64_t> prices;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    const auto events = ds.events_of(u);
    if (events.empty() || !options.cohort.contains(events.size())) continue;
    prices.clear();
    std::int64_t total = 0;
    for (const auto& e : events) {
      prices.push_back(e.price_cents);
      total += e.price_cents;
    }
    if (total <= 0) throw Error("cohort user " + ds.profile(u).user_id + " has zero total spend");
    if (options.shuffle_seed) {
      Rng rng(mix_seed(*options.shuffle_seed, u));
      rng.shuffle(std::span<std::int64_t>(prices));
    }
    ++curve.users;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double normalized = static_cast<double>(prices[i]) / static_cast<double>(total);
      BudgetSample s{u, std::nullopt, normalized};
      if (i > 0) {
        const double delay = days_between(events[i - 1].timestamp, events[i].timestamp);
        s.delay_days = delay;
        const auto day = static_cast<std::int64_t>(std::floor(delay));
        by_day[day].push_back(normalized);
        xs.push_back(static_cast<double>(day));
        ys.push_back(normalized);
      }
      curve.samples.push_back(s);
    }
  }
  if (curve.users == 0) throw Error("budget cohort is empty");

  std::vector<double> cx, cy;
  for (const auto& [day, values] : by_day) {
    BudgetPoint p;
    p.delay_days = day;
    p.n = values.size();
    p.mean = stats::mean(values);
    p.ci_half_width = p.n > 1 ? 1.96 * stats::stddev_sample(values) / std::sqrt(static_cast<double>(p.n)) : 0.0;
    curve.points.push_back(p);
    if (p.n >= options.curve_min_n) {
      cx.push_back(static_cast<double>(day));
      cy.push_back(p.mean);
    }
  }
  curve.event_spearman = stats::spearman(xs, ys);
  curve.curve_spearman = stats::spearman(cx, cy);
  return curve;
}

void write_csv(std::ostream& out, const BudgetCurve& curve) {
  out << "x,mean,ci,n\n";
  for (const auto& p : curve.points) {
    csv::write_row(out, {std::to_string(p.delay_days), csv::num(p.mean), csv::num(p.ci_half_width),
                         std::to_string(p.n)});
  }
  out << "# users," << curve.users << '\n';
  out << "# event_spearman," << csv::num(curve.event_spearman) << '\n';
  out << "# curve_spearman," << csv::num(curve.curve_spearman) << '\n';
}

}  // namespace buyflow::temporal
