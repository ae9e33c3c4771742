#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "buyflow/datastore.hpp"

namespace buyflow::temporal {

// Converts UTC event times to the user's local clock using the zip table.
// Users without a zip (or a zip missing from the table) stay on UTC.
class LocalClock {
 public:
  LocalClock() = default;
  explicit LocalClock(const ZipTimezoneTable* zones) : zones_(zones) {}

  int offset_minutes(const UserProfile& profile) const;
  Timestamp local(const UserProfile& profile, Timestamp utc) const {
    return utc + static_cast<Timestamp>(offset_minutes(profile)) * 60;
  }

 private:
  const ZipTimezoneTable* zones_ = nullptr;
};

enum class Granularity { DayOfWeek, HourOfDay };

struct ActivityProfile {
  Granularity granularity = Granularity::DayOfWeek;
  std::vector<std::size_t> counts;  // 7 slots (Monday first) or 24 hours
  std::vector<std::int64_t> spend_cents;
  std::size_t mondays = 0;  // calendar Mondays in the window
  std::size_t sundays = 0;
  // (Monday events / Mondays) / (Sunday events / Sundays); NaN when undefined.
  double monday_sunday_ratio = 0.0;
};

ActivityProfile activity_profile(const Dataset& dataset, Granularity granularity,
                                 const LocalClock& clock = {});

void write_csv(std::ostream& out, const ActivityProfile& profile);

struct MonthBoundaryRow {
  int year = 0;
  unsigned month = 0;
  std::size_t first_monday_count = 0;
  std::size_t last_monday_count = 0;
  std::int64_t first_monday_spend = 0;
  std::int64_t last_monday_spend = 0;
  double spend_ratio = 0.0;  // first / last; NaN when the last Monday has no spend
  double count_ratio = 0.0;
};

// One row per calendar month lying entirely inside the dataset window.
std::vector<MonthBoundaryRow> month_boundary_test(const Dataset& dataset, const LocalClock& clock = {});

// Mean of the finite spend ratios.
double mean_spend_ratio(const std::vector<MonthBoundaryRow>& rows);

void write_csv(std::ostream& out, const std::vector<MonthBoundaryRow>& rows);

struct RecurringItem {
  std::string item_id;
  std::string item_name;
  std::size_t purchases = 0;  // summed over users who bought it at least twice
  std::size_t users = 0;
  double median_delay_days = 0.0;
};

// Same-instant repeats (one order with quantity > 1) count as purchases but
// contribute no delay; items whose repeats are all same-instant are dropped.
std::vector<RecurringItem> recurring_items(const Dataset& dataset, std::size_t top_k);

void write_csv(std::ostream& out, const std::vector<RecurringItem>& items);

struct DelayDistribution {
  std::vector<double> delays_days;  // fractional, consecutive same-user gaps
  std::vector<double> pdf;          // pdf[k]: mass of delays in [k - 0.5, k + 0.5)

  // Days k with pdf[k] strictly above both neighbours.
  std::vector<std::size_t> local_maxima() const;
};

DelayDistribution delay_distribution(const Dataset& dataset);

void write_csv(std::ostream& out, const DelayDistribution& dist);

struct CohortRange {
  std::size_t min_purchases = 1;
  std::size_t max_purchases = 1;  // inclusive

  bool contains(std::size_t n) const noexcept { return n >= min_purchases && n <= max_purchases; }
};

struct BudgetPoint {
  std::int64_t delay_days = 0;
  double mean = 0.0;
  double ci_half_width = 0.0;  // 1.96 * sample sd / sqrt(n)
  std::size_t n = 0;
};

struct BudgetSample {
  Dataset::UserIndex user = 0;
  std::optional<double> delay_days;  // absent for the user's first event
  double normalized_price = 0.0;
};

struct BudgetCurve {
  std::vector<BudgetPoint> points;  // ascending delay
  std::vector<BudgetSample> samples;
  std::size_t users = 0;
  // Spearman over the pooled (floored delay, normalized price) samples.
  double event_spearman = 0.0;
  // Spearman over curve points with n >= curve_min_n.
  double curve_spearman = 0.0;
};

struct BudgetOptions {
  CohortRange cohort;
  std::optional<std::uint64_t> shuffle_seed;
  std::size_t curve_min_n = 10;
};

BudgetCurve budget_curve(const Dataset& dataset, const BudgetOptions& options);

void write_csv(std::ostream& out, const BudgetCurve& curve);

}  // namespace buyflow::temporal
