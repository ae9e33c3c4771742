#pragma once

#include <cstdint>
#include <string>

#include "buyflow/common/time.hpp"

namespace buyflow {

// Taxonomy path; an empty level1 means the item is uncategorized. Deeper
// levels may be empty when only coarse labels are known.
struct CategoryPath {
  std::string level1;
  std::string level2;
  std::string level3;

  bool known() const noexcept { return !level1.empty(); }
  const std::string& at(int level) const;
  bool operator==(const CategoryPath&) const = default;
};

// One unit of one item bought by one user at one instant.
struct PurchaseEvent {
  std::string user_id;
  Timestamp timestamp = 0;
  std::string item_id;
  std::string item_name;
  std::int64_t price_cents = 0;
  CategoryPath category;
  std::string order_id;
  std::string merchant_id;

  bool operator==(const PurchaseEvent&) const = default;
};

}  // namespace buyflow
