#include <cmath>

#include "buyflow/common/error.hpp"
#include "buyflow/common/time.hpp"
#include "buyflow/synth.hpp"

namespace buyflow::synth {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(std::string(name) + " must lie in [0, 1]");
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw Error(std::string(name) + " must be positive");
}

}  // namespace

void SynthConfig::validate() const {
  if (population == 0) throw Error("population must be positive");
  require_probability(shopper_fraction, "shopper_fraction");
  require_probability(female_share, "female_share");
  require_probability(multi_item_order_prob, "multi_item_order_prob");
  require_probability(class_signal, "class_signal");
  require_probability(female_books_boost, "female_books_boost");
  require_probability(weekly_buyer_fraction, "weekly_buyer_fraction");
  require_probability(consumable_fraction, "consumable_fraction");
  require_probability(cross_community_share, "cross_community_share");
  require_probability(homophily, "homophily");
  require_probability(gender_taste, "gender_taste");
  if (homophily + gender_taste > 1.0) throw Error("homophily + gender_taste must not exceed 1");
  if (!parse_utc(start_date)) throw Error("bad start_date '" + start_date + "'");
  if (months <= 0) throw Error("months must be positive");
  if (min_age < 13 || max_age > 110 || min_age > max_age) throw Error("age range must lie within [13, 110]");
  if (zip_count == 0 || zip_count > 90000) throw Error("zip_count must lie in [1, 90000]");
  require_positive(min_income_usd, "min_income_usd");
  if (max_income_usd < min_income_usd) throw Error("max_income_usd is below min_income_usd");
  require_positive(count_min, "count_min");
  require_positive(count_shape, "count_shape");
  if (items_per_class == 0) throw Error("items_per_class must be positive");
  if (popularity_exponent < 0.0) throw Error("popularity_exponent must be non-negative");
  require_positive(monday_multiplier, "monday_multiplier");
  require_positive(consumable_cycle_days, "consumable_cycle_days");
  if (consumable_jitter_days < 0.0 || consumable_jitter_days >= consumable_cycle_days) {
    throw Error("consumable_jitter_days must lie in [0, cycle)");
  }
  if (budget) {
    if (!(budget_min_horizon_days > 0.0) || !std::isfinite(budget_max_horizon_days)) {
      throw Error("budget horizon must be positive and finite so that every shopper can buy");
    }
    if (budget_max_horizon_days < budget_min_horizon_days) {
      throw Error("budget_max_horizon_days is below the minimum");
    }
  }
  if (community_size < 2) throw Error("community_size must be at least 2");
  if (contacts_per_user < 0.0) throw Error("contacts_per_user must be non-negative");
  if (taste_leaves == 0) throw Error("taste_leaves must be positive");
}

#define BUYFLOW_SYNTH_FIELDS(X)                                                                   \
  X(seed) X(population) X(shopper_fraction) X(start_date) X(months) X(female_share) X(min_age) \
  X(max_age) X(zip_count) X(min_income_usd) X(max_income_usd) X(count_min) X(count_shape)      \
  X(bulk_accounts) X(multi_item_order_prob) X(items_per_class) X(popularity_exponent)          \
  X(income_elasticity) X(class_signal) X(female_books_boost) X(monday_multiplier) X(diurnal)   \
  X(weekly_buyer_fraction) X(consumable_fraction) X(consumable_cycle_days)                     \
  X(consumable_jitter_days) X(budget) X(budget_min_horizon_days) X(budget_max_horizon_days)            \
  X(community_size) X(contacts_per_user) X(cross_community_share) X(homophily) X(gender_taste) \
  X(taste_leaves)

nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
#define X(name) j[#name] = c.name;
  BUYFLOW_SYNTH_FIELDS(X)
#undef X
  return j;
}

SynthConfig from_json(const nlohmann::json& j, SynthConfig c) {
  if (!j.is_object()) throw Error("synth config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    try {
#define X(name)                        \
  if (key == #name) {                  \
    value.get_to(c.name);              \
    known = true;                      \
  }
      BUYFLOW_SYNTH_FIELDS(X)
#undef X
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad value for '" + key + "': " + e.what());
    }
    if (!known) throw Error("unknown synth config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::vector<std::string> preset_names() {
  return {"default", "null", "predictor", "budget", "homophily", "weekly", "recurring", "cohort"};
}

SynthConfig preset(const std::string& name) {
  SynthConfig c;
  if (name == "null") return c;
  if (name == "default") {
    c.multi_item_order_prob = 0.15;
    c.bulk_accounts = 2;
    c.popularity_exponent = 1.0;
    c.income_elasticity = 0.5;
    c.class_signal = 0.3;
    c.female_books_boost = 0.02;
    c.monday_multiplier = 1.326;
    c.diurnal = true;
    c.weekly_buyer_fraction = 0.05;
    c.consumable_fraction = 0.1;
    c.homophily = 0.4;
    c.gender_taste = 0.2;
    return c;
  }
  if (name == "predictor") {
    c.population = 10000;
    c.shopper_fraction = 1.0;
    c.months = 8;
    c.count_min = 4.0;
    c.count_shape = 1.5;
    c.class_signal = 0.7;
    return c;
  }
  if (name == "budget") {
    c.population = 30000;
    c.shopper_fraction = 1.0;
    c.budget = true;
    c.class_signal = 1.0;
    c.budget_min_horizon_days = 180.0;
    c.budget_max_horizon_days = 180.0;
    return c;
  }
  if (name == "homophily") {
    c.population = 6000;
    c.count_min = 10.0;
    c.homophily = 0.4;
    c.gender_taste = 0.3;
    return c;
  }
  if (name == "weekly") {
    c.population = 10000;
    c.monday_multiplier = 1.326;
    c.diurnal = true;
    return c;
  }
  if (name == "recurring") {
    c.population = 4000;
    c.weekly_buyer_fraction = 0.3;
    c.consumable_fraction = 0.3;
    return c;
  }
  if (name == "cohort") {
    c.population = 10000;
    c.popularity_exponent = 1.0;
    c.income_elasticity = 1.0;
    c.female_books_boost = 0.02;
    return c;
  }
  throw Error("unknown preset '" + name + "'");
}

}  // namespace buyflow::synth
