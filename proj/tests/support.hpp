#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "buyflow/common/time.hpp"
#include "buyflow/datastore.hpp"

namespace buyflow::support {

// Accepts the formats of parse_utc plus a trailing 'Z'.
inline Timestamp at(std::string_view text) {
  if (text.ends_with('Z')) text.remove_suffix(1);
  const auto t = parse_utc(text);
  if (!t) throw std::invalid_argument("bad test timestamp");
  return *t;
}

inline PurchaseEvent event(std::string user, const char* when, std::int64_t cents, std::string item = "item",
                           CategoryPath cat = {}) {
  PurchaseEvent e;
  e.user_id = std::move(user);
  e.timestamp = at(when);
  e.item_id = item;
  e.item_name = std::move(item);
  e.price_cents = cents;
  e.category = std::move(cat);
  e.order_id = e.user_id + "@" + when;
  e.merchant_id = "m";
  return e;
}

inline UserProfile profile(std::string user, Gender g, std::optional<int> age = {}, std::optional<std::string> zip = {}) {
  UserProfile p;
  p.user_id = std::move(user);
  p.gender = g;
  p.age = age;
  p.zip = std::move(zip);
  return p;
}

inline Dataset make_dataset(std::vector<PurchaseEvent> events, std::vector<UserProfile> profiles = {},
                            const Taxonomy& taxonomy = {}, std::optional<Window> window = {}) {
  IngestOptions o;
  o.window = window;
  return ingest_and_filter(std::move(events), std::move(profiles), taxonomy, o).dataset;
}

}  // namespace buyflow::support
