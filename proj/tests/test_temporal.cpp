#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "buyflow/common/error.hpp"
#include "buyflow/synth.hpp"
#include "buyflow/temporal.hpp"
#include "support.hpp"

using namespace buyflow;
using namespace buyflow::temporal;
using support::event;
using support::profile;

namespace {

// 2014-03-03 is a Monday; 2014-03-09 is the following Sunday.
Dataset one_week(std::vector<PurchaseEvent> events) {
  return support::make_dataset(std::move(events), {}, {},
                               Window{support::at("2014-03-03"), support::at("2014-03-10")});
}

}  // namespace

TEST(Activity, MondaySundayRatio) {
  const auto ds = one_week({
      event("a", "2014-03-03T09:00:00Z", 100),
      event("b", "2014-03-03T10:00:00Z", 100),
      event("c", "2014-03-03T11:00:00Z", 100),
      event("a", "2014-03-09T09:00:00Z", 100),
  });
  const auto p = activity_profile(ds, Granularity::DayOfWeek);
  EXPECT_EQ(p.mondays, 1u);
  EXPECT_EQ(p.sundays, 1u);
  EXPECT_EQ(p.counts[0], 3u);
  EXPECT_EQ(p.counts[6], 1u);
  EXPECT_DOUBLE_EQ(p.monday_sunday_ratio, 3.0);
}

TEST(Activity, UniformWeekGivesOne) {
  std::vector<PurchaseEvent> events;
  for (int d = 3; d <= 9; ++d) {
    const std::string when = "2014-03-0" + std::to_string(d) + "T12:00:00Z";
    events.push_back(event("u" + std::to_string(d), when.c_str(), 100));
  }
  EXPECT_DOUBLE_EQ(activity_profile(one_week(events), Granularity::DayOfWeek).monday_sunday_ratio, 1.0);
}

TEST(Activity, LocalClockShiftsHour) {
  std::vector<PurchaseEvent> events = {event("a", "2014-03-03T03:30:00Z", 100), event("b", "2014-03-03T03:30:00Z", 100)};
  std::vector<UserProfile> profiles = {profile("a", Gender::Female, 30, "10001"), profile("b", Gender::Male, 30)};
  const auto ds = support::make_dataset(events, profiles);
  const ZipTimezoneTable zones{{"10001", -300}};
  const auto p = activity_profile(ds, Granularity::HourOfDay, LocalClock(&zones));
  // 03:30 UTC is 22:30 the previous day at UTC-5; b has no table entry and stays on UTC.
  EXPECT_EQ(p.counts[22], 1u);
  EXPECT_EQ(p.counts[3], 1u);
  const auto d = activity_profile(ds, Granularity::DayOfWeek, LocalClock(&zones));
  EXPECT_EQ(d.counts[6], 1u);
  EXPECT_EQ(d.counts[0], 1u);
}

TEST(Activity, PropertySlotsSumToEvents) {
  auto cfg = synth::preset("weekly");
  cfg.population = 500;
  const auto in = synth::ingest(synth::generate(cfg));
  const LocalClock clock(&in.zip_timezones);
  for (const auto g : {Granularity::DayOfWeek, Granularity::HourOfDay}) {
    const auto p = activity_profile(in.dataset, g, clock);
    EXPECT_EQ(std::accumulate(p.counts.begin(), p.counts.end(), std::size_t{0}), in.dataset.events().size());
  }
}

TEST(MonthBoundary, EqualSpendGivesOne) {
  // March 2014: first Monday the 3rd, last Monday the 31st.
  const auto ds = support::make_dataset(
      {event("a", "2014-03-03T10:00:00Z", 100), event("b", "2014-03-31T10:00:00Z", 100)}, {}, {},
      Window{support::at("2014-03-01"), support::at("2014-04-01")});
  const auto rows = month_boundary_test(ds);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].year, 2014);
  EXPECT_EQ(rows[0].month, 3u);
  EXPECT_DOUBLE_EQ(rows[0].spend_ratio, 1.0);
  EXPECT_DOUBLE_EQ(mean_spend_ratio(rows), 1.0);
}

TEST(MonthBoundary, ShortWindowIsEmpty) {
  const auto ds = support::make_dataset({event("a", "2014-03-03T10:00:00Z", 100)}, {}, {},
                                        Window{support::at("2014-03-02"), support::at("2014-03-20")});
  EXPECT_TRUE(month_boundary_test(ds).empty());
}

TEST(MonthBoundary, OnlyWholeMonthsInsideTheWindow) {
  const auto ds = support::make_dataset({event("a", "2014-03-03T10:00:00Z", 100)}, {}, {},
                                        Window{support::at("2014-01-15"), support::at("2014-05-01")});
  const auto rows = month_boundary_test(ds);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.front().month, 2u);
  EXPECT_EQ(rows.back().month, 4u);
}

TEST(Recurring, MedianOfConsecutiveGaps) {
  const auto ds = support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 100, "X"),
      event("a", "2014-01-31T00:00:00Z", 100, "X"),
      event("a", "2014-03-14T00:00:00Z", 100, "X"),
      event("a", "2014-01-05T00:00:00Z", 100, "Y"),
  });
  const auto items = recurring_items(ds, 10);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].item_id, "X");
  EXPECT_EQ(items[0].purchases, 3u);
  EXPECT_EQ(items[0].users, 1u);
  EXPECT_DOUBLE_EQ(items[0].median_delay_days, 36.0);
}

TEST(Recurring, SingleBuysAreEliminated) {
  const auto ds = support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 100, "X"),
      event("b", "2014-01-02T00:00:00Z", 100, "X"),
      event("a", "2014-01-03T00:00:00Z", 100, "Y"),
  });
  EXPECT_TRUE(recurring_items(ds, 10).empty());
}

TEST(Recurring, SameInstantRepeatsGiveNoDelay) {
  const auto ds = support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 100, "X"),
      event("a", "2014-01-01T00:00:00Z", 100, "X"),
      event("a", "2014-01-11T00:00:00Z", 100, "X"),
      event("b", "2014-01-01T00:00:00Z", 100, "Q"),
      event("b", "2014-01-01T00:00:00Z", 100, "Q"),
  });
  const auto items = recurring_items(ds, 10);
  ASSERT_EQ(items.size(), 1u);
  EXPECT_EQ(items[0].purchases, 3u);
  EXPECT_DOUBLE_EQ(items[0].median_delay_days, 10.0);
}

TEST(Delay, ConcentratedAtOneDay) {
  const auto d = delay_distribution(support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 100),
      event("a", "2014-01-02T00:00:00Z", 100),
      event("a", "2014-01-03T00:00:00Z", 100),
  }));
  ASSERT_EQ(d.pdf.size(), 2u);
  EXPECT_DOUBLE_EQ(d.pdf[1], 1.0);
  EXPECT_EQ(d.delays_days.size(), 2u);
}

TEST(Delay, NoRepeatBuyersIsEmpty) {
  const auto d = delay_distribution(
      support::make_dataset({event("a", "2014-01-01T00:00:00Z", 100), event("b", "2014-01-02T00:00:00Z", 100)}));
  EXPECT_TRUE(d.pdf.empty());
  EXPECT_TRUE(d.local_maxima().empty());
}

TEST(Budget, HandComputedCurve) {
  const auto ds = support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 0),
      event("a", "2014-01-02T00:00:00Z", 100),
      event("a", "2014-01-12T00:00:00Z", 900),
  });
  const auto c = budget_curve(ds, {{3, 3}, std::nullopt, 1});
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0].delay_days, 1);
  EXPECT_DOUBLE_EQ(c.points[0].mean, 0.1);
  EXPECT_EQ(c.points[1].delay_days, 10);
  EXPECT_DOUBLE_EQ(c.points[1].mean, 0.9);
  EXPECT_EQ(c.users, 1u);
}

TEST(Budget, DelayIsFlooredToWholeDays) {
  const auto ds = support::make_dataset({
      event("a", "2014-01-01T00:00:00Z", 100),
      event("a", "2014-01-02T23:00:00Z", 100),
  });
  const auto c = budget_curve(ds, {{2, 2}, std::nullopt, 1});
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0].delay_days, 1);
}

TEST(Budget, EmptyCohortAndZeroSpendThrow) {
  const auto ds = support::make_dataset({event("a", "2014-01-01T00:00:00Z", 0), event("a", "2014-01-02T00:00:00Z", 0)});
  EXPECT_THROW(budget_curve(ds, {{5, 5}, std::nullopt, 1}), Error);
  EXPECT_THROW(budget_curve(ds, {{2, 2}, std::nullopt, 1}), Error);
}

TEST(Budget, PropertyNormalizedPricesSumToOnePerUser) {
  auto cfg = synth::preset("budget");
  cfg.population = 800;
  const auto in = synth::ingest(synth::generate(cfg));
  for (const auto shuffle : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{5}}) {
    const auto c = budget_curve(in.dataset, {{2, 1000}, shuffle, 10});
    std::vector<double> sums(in.dataset.user_count(), 0.0);
    for (const auto& s : c.samples) {
      EXPECT_GE(s.normalized_price, 0.0);
      EXPECT_LE(s.normalized_price, 1.0);
      sums[s.user] += s.normalized_price;
    }
    for (Dataset::UserIndex u = 0; u < in.dataset.user_count(); ++u) {
      if (in.dataset.event_count(u) >= 2) { EXPECT_NEAR(sums[u], 1.0, 1e-9); }
    }
    for (const auto& p : c.points) EXPECT_GE(p.ci_half_width, 0.0);
  }
}

TEST(Budget, PropertyShuffleKeepsPerUserMeanAndIsSeeded) {
  auto cfg = synth::preset("budget");
  cfg.population = 500;
  const auto in = synth::ingest(synth::generate(cfg));
  const auto base = budget_curve(in.dataset, {{2, 1000}, std::nullopt, 10});
  const auto a = budget_curve(in.dataset, {{2, 1000}, 42, 10});
  const auto b = budget_curve(in.dataset, {{2, 1000}, 42, 10});
  const auto c = budget_curve(in.dataset, {{2, 1000}, 43, 10});
  ASSERT_EQ(base.samples.size(), a.samples.size());

  std::vector<double> mean_base(in.dataset.user_count(), 0.0), mean_a(in.dataset.user_count(), 0.0);
  bool differs = false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    mean_base[base.samples[i].user] += base.samples[i].normalized_price;
    mean_a[a.samples[i].user] += a.samples[i].normalized_price;
    EXPECT_EQ(a.samples[i].normalized_price, b.samples[i].normalized_price);
    differs |= a.samples[i].normalized_price != c.samples[i].normalized_price;
  }
  for (std::size_t u = 0; u < mean_base.size(); ++u) EXPECT_NEAR(mean_base[u], mean_a[u], 1e-12);
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.event_spearman, b.event_spearman);
}

TEST(Budget, PropertyShuffledNullCohortIsFlatForEverySeed) {
  auto cfg = synth::preset("null");
  cfg.population = 6000;
  cfg.shopper_fraction = 1.0;
  const auto in = synth::ingest(synth::generate(cfg));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = budget_curve(in.dataset, {{4, 4}, seed, 10});
    // The pooled sample has a few thousand points; 0.1 is several standard errors.
    EXPECT_LT(std::fabs(c.event_spearman), 0.1) << "seed " << seed;
  }
}
