#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"
#include "buyflow/common/rng.hpp"
#include "buyflow/common/time.hpp"
#include "buyflow/io.hpp"
#include "buyflow/synth.hpp"

namespace buyflow::synth {

namespace {

enum Stream : std::uint64_t { kCatalogue = 1, kZips, kProfiles, kGraph, kTastes, kUsers = 1000 };

struct Department {
  const char* name;
  const char* merchant;
  std::array<const char*, 3> aisles;
};

constexpr Department kDepartments[] = {
    {"Books", "pagebound", {"Fiction", "Nonfiction", "Comics"}},
    {"Electronics", "voltmart", {"Audio", "Computers", "Cameras"}},
    {"Grocery", "freshcrate", {"Pantry", "Beverages", "Household"}},
    {"Home", "bluecart", {"Kitchen", "Furniture", "Garden"}},
    {"Clothing", "northwind", {"Women", "Men", "Shoes"}},
    {"Toys", "bluecart", {"Games", "Puzzles", "Outdoor"}},
};
constexpr std::array<const char*, 4> kShelves = {"Basics", "Classics", "Select", "Premium"};

struct Consumable {
  const char* name;
  std::int64_t price_cents;
};
constexpr Consumable kConsumables[] = {
    {"Coffee Beans 1kg", 1899},
    {"Laundry Detergent 3L", 1349},
    {"Cat Food 24 Cans", 2599},
    {"Water Filter Cartridge", 3499},
};

constexpr std::int64_t kClassBounds[] = {100, 600, 1200, 2000, 4000, 50000};

std::int64_t pareto_count(Rng& rng, double x_min, double shape) {
  double u = 0.0;
  do {
    u = rng.uniform();
  } while (u <= 0.0);
  const double x = x_min * std::pow(u, -1.0 / shape);
  return static_cast<std::int64_t>(std::min(std::floor(x), 1.0e6));
}

int price_class_of(std::int64_t cents) {
  int c = 0;
  while (c < 4 && cents >= kClassBounds[c + 1]) ++c;
  return c;
}

struct Leaf {
  CategoryPath path;
  std::size_t department = 0;
};

struct World {
  std::vector<Leaf> leaves;
  std::vector<CatalogueItem> catalogue;
  std::vector<std::size_t> leaf_of;  // per catalogue item
  std::vector<int> class_of;
  std::vector<double> popularity;
  std::vector<std::size_t> consumables;
  double log_median_price = 0.0;
};

World build_world(const SynthConfig& cfg) {
  World w;
  for (std::size_t d = 0; d < std::size(kDepartments); ++d) {
    for (const char* aisle : kDepartments[d].aisles) {
      for (const char* shelf : kShelves) {
        w.leaves.push_back({{kDepartments[d].name, aisle, std::string(aisle) + " " + shelf}, d});
      }
    }
  }
  Rng rng(mix_seed(cfg.seed, kCatalogue));
  std::vector<double> log_prices;
  for (int c = 0; c < 5; ++c) {
    const double lo = std::log(static_cast<double>(kClassBounds[c]));
    const double hi = std::log(static_cast<double>(kClassBounds[c + 1]));
    for (std::size_t k = 0; k < cfg.items_per_class; ++k) {
      auto cents = static_cast<std::int64_t>(std::floor(std::exp(rng.uniform(lo, hi))));
      cents = std::clamp(cents, kClassBounds[c], kClassBounds[c + 1] - 1);
      const auto leaf = static_cast<std::size_t>(rng.below(w.leaves.size()));
      const auto& path = w.leaves[leaf].path;
      CatalogueItem item;
      item.name = fmt::format("{} {} No. {}", path.level1, path.level3, w.catalogue.size() + 1);
      item.item_id = item.name;
      item.price_cents = cents;
      item.category = path;
      item.merchant_id = kDepartments[w.leaves[leaf].department].merchant;
      w.catalogue.push_back(std::move(item));
      w.leaf_of.push_back(leaf);
      w.class_of.push_back(price_class_of(cents));
      w.popularity.push_back(std::pow(static_cast<double>(cents) / 100.0, -cfg.popularity_exponent));
      log_prices.push_back(std::log(static_cast<double>(cents)));
    }
  }
  std::ranges::sort(log_prices);
  w.log_median_price = log_prices[log_prices.size() / 2];
  for (const auto& c : kConsumables) {
    const std::size_t leaf = 2 * 12 + 2 * 4;  // Grocery > Household > Household Basics
    CatalogueItem item;
    item.name = c.name;
    item.item_id = c.name;
    item.price_cents = c.price_cents;
    item.category = w.leaves[leaf].path;
    item.merchant_id = "freshcrate";
    item.consumable = true;
    w.consumables.push_back(w.catalogue.size());
    w.catalogue.push_back(std::move(item));
    w.leaf_of.push_back(leaf);
    w.class_of.push_back(price_class_of(c.price_cents));
    w.popularity.push_back(0.0);
  }
  return w;
}

struct Shopper {
  std::vector<double> weights;        // per catalogue item
  std::vector<double> books_weights;  // weights restricted to Books
  double books_prob = 0.0;
  int home_class = 0;
};

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), world_(build_world(cfg)) {
    window_.start = *parse_utc(cfg.start_date);
    window_.end = add_months(window_.start, cfg.months);
  }

  SynthOutput run();

 private:
  void make_zips(SynthOutput& out);
  void make_profiles(SynthOutput& out);
  void make_graph(SynthOutput& out);
  void make_tastes();
  void make_events(SynthOutput& out);

  std::size_t draw_item(Rng& rng, const Shopper& s, std::optional<std::string_view> merchant) const;
  Timestamp draw_time(Rng& rng, int offset_minutes) const;
  void user_events(std::size_t user, std::vector<PurchaseEvent>& out);

  const SynthConfig& cfg_;
  World world_;
  Window window_;
  std::vector<std::string> zips_;
  std::vector<UserProfile> profiles_;
  std::vector<int> offsets_;  // per user UTC offset in minutes
  std::vector<double> incomes_;
  std::vector<char> shopper_;
  std::vector<std::size_t> community_;
  std::vector<std::vector<double>> community_taste_;
  std::array<std::vector<double>, 2> gender_taste_;
  std::size_t weekly_buyers_ = 0;
  std::size_t consumable_buyers_ = 0;
};

void Generator::make_zips(SynthOutput& out) {
  Rng rng(mix_seed(cfg_.seed, kZips));
  constexpr int kOffsets[] = {-300, -360, -420, -480};
  constexpr double kOffsetWeights[] = {0.45, 0.3, 0.1, 0.15};
  const double lo = std::log(cfg_.min_income_usd);
  const double hi = std::log(cfg_.max_income_usd);
  for (std::size_t z = 0; z < cfg_.zip_count; ++z) {
    const std::string zip = fmt::format("{:05d}", 10000 + static_cast<int>(z * 89991 / cfg_.zip_count));
    const double usd = std::round(std::exp(rng.uniform(lo, hi)) / 100.0) * 100.0;
    out.zip_income[zip] = static_cast<std::int64_t>(usd) * 100;
    out.zip_timezones[zip] = kOffsets[rng.weighted(kOffsetWeights)];
    zips_.push_back(zip);
  }
}

void Generator::make_profiles(SynthOutput& out) {
  Rng rng(mix_seed(cfg_.seed, kProfiles));
  const int width = std::max(6, static_cast<int>(std::to_string(cfg_.population).size()));
  for (std::size_t u = 0; u < cfg_.population; ++u) {
    UserProfile p;
    p.user_id = fmt::format("u{:0{}d}", u + 1, width);
    p.gender = rng.bernoulli(cfg_.female_share) ? Gender::Female : Gender::Male;
    p.age = cfg_.min_age + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg_.max_age - cfg_.min_age + 1)));
    const auto& zip = zips_[rng.below(zips_.size())];
    p.zip = zip;
    offsets_.push_back(out.zip_timezones.at(zip));
    incomes_.push_back(static_cast<double>(out.zip_income.at(zip)) / 100.0);
    const bool shops = rng.bernoulli(cfg_.shopper_fraction);
    shopper_.push_back(shops || u < cfg_.bulk_accounts ? 1 : 0);
    profiles_.push_back(p);
  }
  out.profiles = profiles_;
}

void Generator::make_graph(SynthOutput& out) {
  Rng rng(mix_seed(cfg_.seed, kGraph));
  const std::size_t n = cfg_.population;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  community_.assign(n, 0);
  const std::size_t n_communities = (n + cfg_.community_size - 1) / cfg_.community_size;
  std::vector<std::vector<std::size_t>> members(n_communities);
  for (std::size_t i = 0; i < n; ++i) {
    community_[order[i]] = i / cfg_.community_size;
    members[i / cfg_.community_size].push_back(order[i]);
  }
  if (n < 2) return;
  const double half = cfg_.contacts_per_user / 2.0;
  for (std::size_t u = 0; u < n; ++u) {
    auto k = static_cast<std::size_t>(std::floor(half));
    if (rng.bernoulli(half - std::floor(half))) ++k;
    for (std::size_t e = 0; e < k; ++e) {
      const auto& own = members[community_[u]];
      std::size_t v = u;
      if (own.size() < 2 || rng.bernoulli(cfg_.cross_community_share)) {
        while (v == u) v = rng.below(n);
      } else {
        while (v == u) v = own[rng.below(own.size())];
      }
      const auto& a = profiles_[u].user_id;
      const auto& b = profiles_[v].user_id;
      out.edges.push_back({a, b, 2 + static_cast<std::int64_t>(rng.below(30))});
      if (rng.bernoulli(0.8)) out.edges.push_back({b, a, 1 + static_cast<std::int64_t>(rng.below(30))});
    }
    // Occasional weak ties and notes to self, both dropped on ingest.
    if (rng.bernoulli(0.05)) {
      std::size_t v = u;
      while (v == u) v = rng.below(n);
      out.edges.push_back({profiles_[u].user_id, profiles_[v].user_id, 1 + static_cast<std::int64_t>(rng.below(2))});
    }
    if (rng.bernoulli(0.01)) out.edges.push_back({profiles_[u].user_id, profiles_[u].user_id, 10});
  }
}

std::vector<double> concentrated_taste(Rng& rng, std::size_t n_leaves, std::size_t k) {
  std::vector<double> t(n_leaves, 0.0);
  std::vector<std::size_t> idx(n_leaves);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(idx));
  k = std::min(k, n_leaves);
  for (std::size_t i = 0; i < k; ++i) t[idx[i]] = 1.0 / static_cast<double>(k);
  return t;
}

void Generator::make_tastes() {
  Rng rng(mix_seed(cfg_.seed, kTastes));
  const std::size_t n_leaves = world_.leaves.size();
  const std::size_t n_communities = *std::ranges::max_element(community_) + 1;
  for (std::size_t c = 0; c < n_communities; ++c) {
    community_taste_.push_back(concentrated_taste(rng, n_leaves, cfg_.taste_leaves));
  }
  // Female tastes are narrower than male tastes, so two women agree more
  // often than two men, who in turn agree more than a mixed pair.
  gender_taste_[0] = concentrated_taste(rng, n_leaves, 2);
  gender_taste_[1] = concentrated_taste(rng, n_leaves, 6);
}

std::size_t Generator::draw_item(Rng& rng, const Shopper& s, std::optional<std::string_view> merchant) const {
  const auto& cat = world_.catalogue;
  if (merchant) {
    std::vector<double> w(s.weights);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (cat[i].merchant_id != *merchant) w[i] = 0.0;
    }
    return rng.weighted(w);
  }
  if (s.books_prob > 0.0 && rng.bernoulli(s.books_prob)) return rng.weighted(s.books_weights);
  if (cfg_.class_signal > 0.0 && rng.bernoulli(cfg_.class_signal)) {
    std::vector<double> w(s.weights);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (world_.class_of[i] != s.home_class) w[i] = 0.0;
    }
    return rng.weighted(w);
  }
  return rng.weighted(s.weights);
}

Timestamp Generator::draw_time(Rng& rng, int offset_minutes) const {
  // Local hour weights: quiet nights, a lunchtime bump and an evening peak.
  constexpr double kHours[24] = {0.3, 0.2, 0.15, 0.1, 0.1, 0.15, 0.3, 0.5, 0.8, 1.0, 1.1, 1.2,
                                 1.4, 1.3, 1.1, 1.0, 1.0, 1.1, 1.3, 1.5, 1.6, 1.4, 1.0, 0.6};
  const std::int64_t first_day = day_number(window_.start);
  const std::int64_t days = day_number(window_.end - 1) - first_day + 1;
  const double w_max = std::max(1.0, cfg_.monday_multiplier);
  for (;;) {
    const std::int64_t day = first_day + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(days)));
    const double w = weekday_of_day(day) == 0 ? cfg_.monday_multiplier : 1.0;
    if (!rng.bernoulli(w / w_max)) continue;
    const auto hour = static_cast<std::int64_t>(cfg_.diurnal ? rng.weighted(kHours) : rng.below(24));
    const auto second = static_cast<std::int64_t>(rng.below(3600));
    const Timestamp local = day * kSecondsPerDay + hour * 3600 + second;
    const Timestamp utc = local - static_cast<Timestamp>(offset_minutes) * 60;
    if (window_.contains(utc)) return utc;
  }
}

void Generator::user_events(std::size_t u, std::vector<PurchaseEvent>& out) {
  Rng rng(mix_seed(cfg_.seed, kUsers + u));
  const auto& profile = profiles_[u];
  const auto& cat = world_.catalogue;
  const std::size_t n_leaves = world_.leaves.size();

  Shopper s;
  s.home_class = static_cast<int>(rng.below(5));
  std::vector<double> taste(n_leaves);
  const double base = 1.0 - cfg_.homophily - cfg_.gender_taste;
  const auto& gt = gender_taste_[profile.gender == Gender::Female ? 0 : 1];
  for (std::size_t l = 0; l < n_leaves; ++l) {
    taste[l] = base / static_cast<double>(n_leaves) + cfg_.homophily * community_taste_[community_[u]][l] +
               cfg_.gender_taste * gt[l];
  }
  const double tilt = cfg_.income_elasticity * std::log(incomes_[u] / std::sqrt(cfg_.min_income_usd * cfg_.max_income_usd));
  s.weights.resize(cat.size());
  s.books_weights.assign(cat.size(), 0.0);
  double total = 0.0, books = 0.0;
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const double rel = std::log(static_cast<double>(cat[i].price_cents)) - world_.log_median_price;
    s.weights[i] = world_.popularity[i] * taste[world_.leaf_of[i]] * std::exp(tilt * rel);
    total += s.weights[i];
    if (world_.leaves[world_.leaf_of[i]].department == 0) {
      s.books_weights[i] = s.weights[i];
      books += s.weights[i];
    }
  }
  if (profile.gender == Gender::Female && cfg_.female_books_boost > 0.0 && books > 0.0) {
    const double share = books / total;
    s.books_prob = std::min(1.0, cfg_.female_books_boost / (1.0 - share));
  }

  const bool bulk = u < cfg_.bulk_accounts;
  std::int64_t n = bulk ? 1001 + static_cast<std::int64_t>(rng.below(200)) : pareto_count(rng, cfg_.count_min, cfg_.count_shape);
  n = std::max<std::int64_t>(n, 1);
  const int offset = offsets_[u];
  std::size_t order_seq = 0;
  const auto emit = [&](Timestamp ts, const std::vector<std::size_t>& items) {
    const std::string order_id = fmt::format("{}-{:04d}", profile.user_id, ++order_seq);
    for (auto i : items) {
      PurchaseEvent e;
      e.user_id = profile.user_id;
      e.timestamp = ts;
      e.item_id = cat[i].item_id;
      e.item_name = cat[i].name;
      e.price_cents = cat[i].price_cents;
      e.category = cat[i].category;
      e.order_id = order_id;
      e.merchant_id = cat[i].merchant_id;
      out.push_back(std::move(e));
    }
  };

  if (cfg_.budget && !bulk) {
    std::vector<std::size_t> plan;
    double planned = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      plan.push_back(draw_item(rng, s, std::nullopt));
      planned += static_cast<double>(cat[plan.back()].price_cents) / 100.0;
    }
    const double horizon =
        std::exp(rng.uniform(std::log(cfg_.budget_min_horizon_days), std::log(cfg_.budget_max_horizon_days)));
    const double rate = planned / horizon;
    double budget = 0.0;
    std::int64_t day = day_number(window_.start) + static_cast<std::int64_t>(rng.below(30));
    for (std::size_t bought = 0; bought < plan.size(); ++day) {
      budget += rate;
      const double p = static_cast<double>(cat[plan[bought]].price_cents) / 100.0;
      const double prob = 1.0 / (1.0 + std::exp(-(budget - p) / (0.05 * p)));
      if (!rng.bernoulli(prob)) continue;
      const Timestamp ts = day * kSecondsPerDay + static_cast<Timestamp>(rng.below(kSecondsPerDay));
      emit(ts, {plan[bought]});
      budget = std::max(budget - p, 0.0);
      ++bought;
    }
    return;
  }

  if (!bulk && rng.bernoulli(cfg_.weekly_buyer_fraction)) {
    ++weekly_buyers_;
    const int cycle = rng.bernoulli(0.5) ? 7 : 14;
    Timestamp t = window_.start + static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(cycle) * kSecondsPerDay));
    for (std::int64_t k = 0; k < n; ++k) {
      const Timestamp ts = t + static_cast<Timestamp>(k) * cycle * kSecondsPerDay +
                           static_cast<Timestamp>(rng.below(6 * 3600)) - 3 * 3600;
      if (!window_.contains(ts)) break;
      emit(ts, {draw_item(rng, s, std::nullopt)});
    }
  } else {
    std::int64_t remaining = n;
    while (remaining > 0) {
      std::int64_t size = 1;
      if (rng.bernoulli(cfg_.multi_item_order_prob)) size = std::min<std::int64_t>(remaining, 2 + static_cast<std::int64_t>(rng.below(2)));
      const Timestamp ts = draw_time(rng, offset);
      std::vector<std::size_t> items{draw_item(rng, s, std::nullopt)};
      while (static_cast<std::int64_t>(items.size()) < size) items.push_back(draw_item(rng, s, cat[items.front()].merchant_id));
      emit(ts, items);
      remaining -= size;
    }
  }

  if (!bulk && rng.bernoulli(cfg_.consumable_fraction)) {
    ++consumable_buyers_;
    const auto item = world_.consumables[rng.below(world_.consumables.size())];
    const double cycle = cfg_.consumable_cycle_days * kSecondsPerDay;
    double t = static_cast<double>(window_.start) + rng.uniform() * cycle;
    while (t < static_cast<double>(window_.end)) {
      emit(static_cast<Timestamp>(t), {item});
      t += cycle + rng.uniform(-cfg_.consumable_jitter_days, cfg_.consumable_jitter_days) * kSecondsPerDay;
    }
  }
}

void Generator::make_events(SynthOutput& out) {
  for (std::size_t u = 0; u < cfg_.population; ++u) {
    if (!shopper_[u]) continue;
    const std::size_t first = out.events.size();
    user_events(u, out.events);
    const auto begin = out.events.begin() + static_cast<std::ptrdiff_t>(first);
    std::stable_sort(begin, out.events.end(),
                     [](const PurchaseEvent& a, const PurchaseEvent& b) { return a.timestamp < b.timestamp; });
    // Number orders in time order.
    std::unordered_map<std::string, std::string> renamed;
    for (auto it = begin; it != out.events.end(); ++it) {
      auto [pos, fresh] = renamed.try_emplace(it->order_id);
      if (fresh) pos->second = fmt::format("{}-{:04d}", it->user_id, renamed.size());
      it->order_id = pos->second;
    }
  }
}

SynthOutput Generator::run() {
  SynthOutput out;
  make_zips(out);
  make_profiles(out);
  make_graph(out);
  make_tastes();
  make_events(out);
  for (const auto& item : world_.catalogue) out.taxonomy.add(item.item_id, item.category);
  out.catalogue = world_.catalogue;

  auto& gt = out.ground_truth;
  gt["config"] = to_json(cfg_);
  gt["window"] = {{"start", format_utc(window_.start)}, {"end", format_utc(window_.end)}};
  std::size_t shoppers = 0;
  for (char c : shopper_) shoppers += c ? 1 : 0;
  gt["shoppers"] = shoppers;
  gt["events"] = out.events.size();
  gt["count_p95"] = std::floor(cfg_.count_min * std::pow(20.0, 1.0 / cfg_.count_shape));
  gt["monday_multiplier"] = cfg_.monday_multiplier;
  gt["weekly_buyers"] = weekly_buyers_;
  gt["consumable_buyers"] = consumable_buyers_;
  auto& cons = gt["consumables"] = nlohmann::ordered_json::array();
  for (auto i : world_.consumables) cons.push_back(world_.catalogue[i].item_id);
  gt["consumable_cycle_days"] = cfg_.consumable_cycle_days;
  gt["female_books_boost"] = cfg_.female_books_boost;
  gt["class_signal"] = cfg_.class_signal;
  gt["budget"] = cfg_.budget;
  gt["homophily"] = cfg_.homophily;
  gt["gender_taste"] = cfg_.gender_taste;
  gt["bulk_accounts"] = cfg_.bulk_accounts;
  return out;
}

template <class F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  return Generator(config).run();
}

void write_output(const SynthOutput& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "events.jsonl", [&](std::ostream& out) { io::write_events(out, o.events); });
  write_file(dir / "profiles.csv", [&](std::ostream& out) { io::write_profiles(out, o.profiles); });
  write_file(dir / "zip_income.csv", [&](std::ostream& out) {
    std::vector<std::pair<std::string, std::int64_t>> rows(o.zip_income.begin(), o.zip_income.end());
    std::ranges::sort(rows);
    csv::write_row(out, {"zip", "median_income_usd"});
    for (const auto& [zip, cents] : rows) csv::write_row(out, {zip, std::to_string(cents / 100)});
  });
  write_file(dir / "zip_timezone.csv", [&](std::ostream& out) {
    std::vector<std::pair<std::string, int>> rows(o.zip_timezones.begin(), o.zip_timezones.end());
    std::ranges::sort(rows);
    csv::write_row(out, {"zip", "utc_offset_minutes"});
    for (const auto& [zip, offset] : rows) csv::write_row(out, {zip, std::to_string(offset)});
  });
  write_file(dir / "edges.csv", [&](std::ostream& out) { io::write_edges(out, o.edges); });
  write_file(dir / "taxonomy.csv", [&](std::ostream& out) { io::write_taxonomy(out, o.taxonomy); });
  write_file(dir / "ground_truth.json", [&](std::ostream& out) { out << o.ground_truth.dump(2) << '\n'; });
}

Ingested ingest(const SynthOutput& o) {
  auto profiles = join_income(o.profiles, o.zip_income);
  auto result = ingest_and_filter(o.events, std::move(profiles), o.taxonomy);
  std::vector<std::string> shoppers;
  const auto& ds = result.dataset;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    if (ds.is_shopper(u)) shoppers.push_back(ds.profile(u).user_id);
  }
  auto graph = build_graph(o.edges, shoppers);
  return {std::move(result.dataset), std::move(graph), o.zip_timezones};
}

std::vector<RenderedReceipt> render_receipts(std::span<const PurchaseEvent> events,
                                             const receipt::TemplateSet& templates) {
  std::vector<RenderedReceipt> out;
  for (std::size_t i = 0; i < events.size();) {
    std::size_t j = i;
    while (j < events.size() && events[j].order_id == events[i].order_id && events[j].user_id == events[i].user_id) ++j;
    const auto& head = events[i];
    const auto* tmpl = templates.find(head.merchant_id);
    if (!tmpl) throw Error("no template for merchant '" + head.merchant_id + "'");
    receipt::ParsedOrder order;
    order.merchant_id = head.merchant_id;
    order.order_id = head.order_id;
    order.timestamp = head.timestamp;
    for (std::size_t k = i; k < j; ++k) {
      if (events[k].merchant_id != head.merchant_id || events[k].timestamp != head.timestamp) {
        throw Error("order " + head.order_id + " mixes merchants or times");
      }
      // Consecutive identical lines collapse into one line with a quantity.
      if (!order.lines.empty() && order.lines.back().item_name == events[k].item_name &&
          order.lines.back().price_cents == events[k].price_cents) {
        ++order.lines.back().quantity;
      } else {
        order.lines.push_back({events[k].item_name, events[k].price_cents, 1});
      }
    }
    out.push_back({head.user_id, head.order_id, receipt::render_email(*tmpl, order, head.user_id)});
    i = j;
  }
  return out;
}

}  // namespace buyflow::synth
