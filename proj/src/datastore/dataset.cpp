#include <algorithm>
#include <map>
#include <numeric>

#include "buyflow/common/error.hpp"
#include "buyflow/datastore.hpp"

namespace buyflow {

const std::string& CategoryPath::at(int level) const {
  switch (level) {
    case 1: return level1;
    case 2: return level2;
    case 3: return level3;
  }
  throw Error("category level must be 1, 2 or 3");
}

std::string_view gender_name(Gender g) {
  switch (g) {
    case Gender::Female: return "female";
    case Gender::Male: return "male";
    case Gender::Unknown: break;
  }
  return "unknown";
}

Gender parse_gender(std::string_view text) {
  if (text == "female" || text == "f" || text == "F" || text == "Female") return Gender::Female;
  if (text == "male" || text == "m" || text == "M" || text == "Male") return Gender::Male;
  return Gender::Unknown;
}

void validate_profile(const UserProfile& p) {
  if (p.user_id.empty()) throw Error("profile with empty user id");
  if (p.age && (*p.age < 13 || *p.age > 110)) {
    throw Error("user " + p.user_id + ": age " + std::to_string(*p.age) + " outside [13, 110]");
  }
  if (p.zip && (p.zip->size() != 5 || !std::ranges::all_of(*p.zip, [](char c) {
                  return c >= '0' && c <= '9';
                }))) {
    throw Error("user " + p.user_id + ": zip '" + *p.zip + "' is not 5 digits");
  }
}

void Taxonomy::add(const std::string& item_id, CategoryPath leaf) {
  if (leaf.level1.empty() || leaf.level2.empty() || leaf.level3.empty()) {
    throw Error("taxonomy leaf for item '" + item_id + "' is not at depth 3");
  }
  auto [it, inserted] = leaves_.try_emplace(item_id, leaf);
  if (!inserted && it->second != leaf) {
    throw Error("item '" + item_id + "' maps to two taxonomy leaves");
  }
}

const CategoryPath* Taxonomy::find(std::string_view item_id) const {
  auto it = leaves_.find(std::string(item_id));
  return it == leaves_.end() ? nullptr : &it->second;
}

std::optional<Dataset::UserIndex> Dataset::index_of(std::string_view user_id) const {
  auto it = index_.find(std::string(user_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const PurchaseEvent> Dataset::events_of(UserIndex u) const {
  return std::span<const PurchaseEvent>(events_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

std::size_t Dataset::shopper_count() const {
  std::size_t n = 0;
  for (UserIndex u = 0; u < users_.size(); ++u) n += is_shopper(u) ? 1 : 0;
  return n;
}

std::int32_t Dataset::category_id(std::size_t event_index, int level) const {
  if (level < 1 || level > 3) throw Error("category level must be 1, 2 or 3");
  return category_ids_[event_index][static_cast<std::size_t>(level - 1)];
}

std::size_t Dataset::category_count(int level) const {
  if (level < 1 || level > 3) throw Error("category level must be 1, 2 or 3");
  return category_labels_[static_cast<std::size_t>(level - 1)].size();
}

const std::string& Dataset::category_label(int level, std::int32_t id) const {
  return category_labels_.at(static_cast<std::size_t>(level - 1)).at(static_cast<std::size_t>(id));
}

std::optional<std::int32_t> Dataset::find_category(int level, std::string_view label) const {
  const auto& labels = category_labels_.at(static_cast<std::size_t>(level - 1));
  auto it = std::lower_bound(labels.begin(), labels.end(), label);
  if (it == labels.end() || *it != label) return std::nullopt;
  return static_cast<std::int32_t>(it - labels.begin());
}

namespace {

// Label of a category node: the path joined with " > ".
std::string path_label(const CategoryPath& c, int level) {
  std::string label = c.level1;
  if (level >= 2) label += " > " + c.level2;
  if (level >= 3) label += " > " + c.level3;
  return label;
}

bool path_has_gap(const CategoryPath& c) {
  return (c.level1.empty() && !c.level2.empty()) || (c.level2.empty() && !c.level3.empty());
}

}  // namespace

struct DatasetBuilder {
  static void build(Dataset& ds, std::vector<PurchaseEvent> events,
                    std::vector<UserProfile> profiles, Window window, FilterProvenance prov) {
    ds.window_ = window;
    ds.provenance_ = prov;
    std::ranges::sort(profiles, {}, &UserProfile::user_id);
    for (std::size_t i = 1; i < profiles.size(); ++i) {
      if (profiles[i].user_id == profiles[i - 1].user_id) {
        throw Error("duplicate profile for user " + profiles[i].user_id);
      }
    }
    // Users referenced only by events get an unknown profile.
    std::vector<std::string> extra;
    for (const auto& e : events) {
      if (!std::ranges::binary_search(profiles, e.user_id, {}, &UserProfile::user_id)) {
        extra.push_back(e.user_id);
      }
    }
    std::ranges::sort(extra);
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    for (auto& id : extra) {
      UserProfile unknown;
      unknown.user_id = std::move(id);
      profiles.push_back(std::move(unknown));
    }
    std::ranges::sort(profiles, {}, &UserProfile::user_id);

    ds.users_ = std::move(profiles);
    ds.index_.clear();
    for (Dataset::UserIndex u = 0; u < ds.users_.size(); ++u) ds.index_[ds.users_[u].user_id] = u;

    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Dataset::UserIndex> owner(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) owner[i] = ds.index_.at(events[i].user_id);
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
      if (owner[a] != owner[b]) return owner[a] < owner[b];
      return events[a].timestamp < events[b].timestamp;
    });

    ds.events_.clear();
    ds.events_.reserve(events.size());
    ds.offsets_.assign(ds.users_.size() + 1, 0);
    for (std::size_t i : order) {
      ++ds.offsets_[owner[i] + 1];
      ds.events_.push_back(std::move(events[i]));
    }
    for (std::size_t u = 0; u < ds.users_.size(); ++u) ds.offsets_[u + 1] += ds.offsets_[u];

    for (int level = 1; level <= 3; ++level) {
      auto& labels = ds.category_labels_[static_cast<std::size_t>(level - 1)];
      labels.clear();
      for (const auto& e : ds.events_) {
        if (!e.category.at(level).empty()) labels.push_back(path_label(e.category, level));
      }
      std::ranges::sort(labels);
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    }
    ds.category_ids_.assign(ds.events_.size(), {Dataset::kUnknownCategory, Dataset::kUnknownCategory,
                                                Dataset::kUnknownCategory});
    for (std::size_t i = 0; i < ds.events_.size(); ++i) {
      for (int level = 1; level <= 3; ++level) {
        if (ds.events_[i].category.at(level).empty()) continue;
        ds.category_ids_[i][static_cast<std::size_t>(level - 1)] =
            *ds.find_category(level, path_label(ds.events_[i].category, level));
      }
    }
  }
};

IngestResult ingest_and_filter(std::vector<PurchaseEvent> events,
                               std::vector<UserProfile> profiles, const Taxonomy& taxonomy,
                               const IngestOptions& options) {
  IngestResult result;
  for (const auto& p : profiles) validate_profile(p);

  Window window;
  if (options.window) {
    window = *options.window;
  } else if (!events.empty()) {
    auto [lo, hi] = std::ranges::minmax(events, {}, &PurchaseEvent::timestamp);
    window = {lo.timestamp, hi.timestamp + 1};
  }

  std::vector<PurchaseEvent> accepted;
  accepted.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& e = events[i];
    std::string reason;
    if (e.user_id.empty()) {
      reason = "empty user id";
    } else if (e.price_cents < 0) {
      reason = "negative price";
    } else if (!window.contains(e.timestamp)) {
      reason = "timestamp outside dataset window";
    } else if (path_has_gap(e.category)) {
      reason = "category path skips a level";
    } else if (const CategoryPath* leaf = taxonomy.find(e.item_id)) {
      if (!e.category.known()) {
        e.category = *leaf;
      } else if (e.category.level1 != leaf->level1 ||
                 (!e.category.level2.empty() && e.category.level2 != leaf->level2) ||
                 (!e.category.level3.empty() && e.category.level3 != leaf->level3)) {
        reason = "category conflicts with taxonomy";
      }
    }
    if (!reason.empty()) {
      result.rejected.push_back({i, e, reason});
      continue;
    }
    accepted.push_back(std::move(e));
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& e : accepted) ++counts[e.user_id];
  FilterProvenance prov;
  prov.max_purchases = options.max_purchases;
  prov.input_events = events.size();
  prov.rejected_records = result.rejected.size();
  for (const auto& [user, n] : counts) {
    if (n > options.max_purchases) {
      ++prov.removed_users;
      prov.removed_events += n;
    }
  }
  std::erase_if(accepted, [&](const PurchaseEvent& e) { return counts[e.user_id] > options.max_purchases; });
  // Bulk accounts are removed from the population as well.
  std::erase_if(profiles, [&](const UserProfile& p) {
    auto it = counts.find(p.user_id);
    return it != counts.end() && it->second > options.max_purchases;
  });

  DatasetBuilder::build(result.dataset, std::move(accepted), std::move(profiles), window, prov);
  return result;
}

std::vector<UserProfile> join_income(std::vector<UserProfile> profiles, const ZipIncomeTable& table) {
  for (auto& p : profiles) {
    p.income_cents.reset();
    if (!p.zip) continue;
    if (auto it = table.find(*p.zip); it != table.end()) p.income_cents = it->second;
  }
  return profiles;
}

}  // namespace buyflow
