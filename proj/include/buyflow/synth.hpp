#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "buyflow/datastore.hpp"
#include "buyflow/receipt.hpp"

namespace buyflow::synth {

// Every effect strength defaults to off; presets switch on what a scenario
// needs. Probabilities must lie in [0, 1].
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t population = 2000;
  double shopper_fraction = 0.7;
  std::string start_date = "2014-01-01";
  int months = 12;

  // Demographics.
  double female_share = 0.5;
  int min_age = 18;
  int max_age = 80;
  std::size_t zip_count = 100;
  double min_income_usd = 25000;
  double max_income_usd = 150000;

  // Purchase counts: floor of a Pareto(x_min, shape) draw, at least x_min.
  double count_min = 2.0;
  double count_shape = 1.5;
  std::size_t bulk_accounts = 0;  // users above the 1,000-purchase cap
  double multi_item_order_prob = 0.0;

  // Catalogue and item choice.
  std::size_t items_per_class = 40;
  double popularity_exponent = 0.0;  // item weight ~ price^-exponent
  double income_elasticity = 0.0;    // price tilt ~ (income / median)^elasticity
  double class_signal = 0.0;         // prob. of buying in the user's home price class
  double female_books_boost = 0.0;   // added female share of "Books" purchases

  // Timing.
  double monday_multiplier = 1.0;
  bool diurnal = false;
  double weekly_buyer_fraction = 0.0;  // buy every 7 or 14 days
  double consumable_fraction = 0.0;    // also buy a consumable every cycle +- jitter days
  double consumable_cycle_days = 30.0;
  double consumable_jitter_days = 3.0;

  // Budget depletion: each shopper accrues a daily budget and buys the next
  // desired item with probability sigmoid((B - p) / (0.05 p)). The daily
  // rate is the user's planned spend divided by a horizon drawn log-uniform
  // between the two bounds.
  bool budget = false;
  double budget_min_horizon_days = 120.0;
  double budget_max_horizon_days = 240.0;

  // Social graph and category tastes.
  std::size_t community_size = 25;
  double contacts_per_user = 4.0;
  double cross_community_share = 0.1;
  double homophily = 0.0;        // weight of the shared community taste
  double gender_taste = 0.0;     // weight of the gender taste
  std::size_t taste_leaves = 4;  // leaves favoured by each community taste

  void validate() const;
};

SynthConfig preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::ordered_json to_json(const SynthConfig& config);
// Unknown keys are an error; missing keys keep the defaults of `base`.
SynthConfig from_json(const nlohmann::json& j, SynthConfig base = {});

struct CatalogueItem {
  std::string item_id;
  std::string name;
  std::int64_t price_cents = 0;
  CategoryPath category;
  std::string merchant_id;
  bool consumable = false;
};

struct SynthOutput {
  std::vector<PurchaseEvent> events;  // ordered by (user, time, order line)
  std::vector<UserProfile> profiles;  // without income; see zip_income
  ZipIncomeTable zip_income;
  ZipTimezoneTable zip_timezones;
  std::vector<EdgeRecord> edges;
  Taxonomy taxonomy;
  std::vector<CatalogueItem> catalogue;
  nlohmann::ordered_json ground_truth;
};

// Throws Error on an invalid or infeasible configuration.
SynthOutput generate(const SynthConfig& config);

// Writes events.jsonl, profiles.csv, zip_income.csv, zip_timezone.csv,
// edges.csv, taxonomy.csv and ground_truth.json.
void write_output(const SynthOutput& output, const std::filesystem::path& dir);

struct Ingested {
  Dataset dataset;
  EmailGraph graph;
  ZipTimezoneTable zip_timezones;
};

// The in-memory equivalent of writing the files and loading the directory.
Ingested ingest(const SynthOutput& output);

struct RenderedReceipt {
  std::string user_id;
  std::string order_id;
  std::string email;
};

// One email per order, in event order. Throws Error when a merchant has no
// template.
std::vector<RenderedReceipt> render_receipts(std::span<const PurchaseEvent> events,
                                             const receipt::TemplateSet& templates);

}  // namespace buyflow::synth
