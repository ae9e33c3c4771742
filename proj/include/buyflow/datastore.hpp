#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "buyflow/common/time.hpp"
#include "buyflow/event.hpp"

namespace buyflow {

enum class Gender { Unknown, Female, Male };

std::string_view gender_name(Gender g);
Gender parse_gender(std::string_view text);  // "female"/"f", "male"/"m", else Unknown

struct UserProfile {
  std::string user_id;
  Gender gender = Gender::Unknown;
  std::optional<int> age;          // [13, 110]
  std::optional<std::string> zip;  // 5 digits
  std::optional<std::int64_t> income_cents;

  bool operator==(const UserProfile&) const = default;
};

// Validates the profile invariants; throws Error on violation.
void validate_profile(const UserProfile& profile);

// Depth-3 category tree expressed as item -> leaf path.
class Taxonomy {
 public:
  // Every leaf has all three levels; an item maps to one leaf. Re-adding the
  // same item with a different path throws.
  void add(const std::string& item_id, CategoryPath leaf);
  const CategoryPath* find(std::string_view item_id) const;
  std::size_t size() const noexcept { return leaves_.size(); }

  const std::unordered_map<std::string, CategoryPath>& items() const noexcept { return leaves_; }

 private:
  std::unordered_map<std::string, CategoryPath> leaves_;
};

struct Window {
  Timestamp start = 0;
  Timestamp end = 0;  // exclusive

  bool contains(Timestamp t) const noexcept { return t >= start && t < end; }
};

struct FilterProvenance {
  std::size_t max_purchases = 1000;
  std::size_t input_events = 0;
  std::size_t removed_users = 0;
  std::size_t removed_events = 0;
  std::size_t rejected_records = 0;
};

struct RejectedRecord {
  std::size_t index = 0;  // position in the input list
  PurchaseEvent event;
  std::string reason;
};

// Immutable purchase log. Users are the union of profile users and event
// users, sorted by id; each user's events are contiguous and ordered by time
// (input order breaks ties).
class Dataset {
 public:
  using UserIndex = std::uint32_t;
  static constexpr std::int32_t kUnknownCategory = -1;

  Dataset() = default;

  std::size_t user_count() const noexcept { return users_.size(); }
  const std::vector<UserProfile>& users() const noexcept { return users_; }
  const UserProfile& profile(UserIndex u) const { return users_[u]; }
  std::optional<UserIndex> index_of(std::string_view user_id) const;

  const std::vector<PurchaseEvent>& events() const noexcept { return events_; }
  std::span<const PurchaseEvent> events_of(UserIndex u) const;
  std::size_t first_event(UserIndex u) const { return offsets_[u]; }
  std::size_t event_count(UserIndex u) const { return offsets_[u + 1] - offsets_[u]; }
  bool is_shopper(UserIndex u) const { return event_count(u) > 0; }
  std::size_t shopper_count() const;

  // Interned category id of an event at level 1..3, or kUnknownCategory.
  std::int32_t category_id(std::size_t event_index, int level) const;
  std::size_t category_count(int level) const;
  const std::string& category_label(int level, std::int32_t id) const;
  std::optional<std::int32_t> find_category(int level, std::string_view label) const;

  const Window& window() const noexcept { return window_; }
  const FilterProvenance& provenance() const noexcept { return provenance_; }

 private:
  friend struct DatasetBuilder;

  std::vector<UserProfile> users_;
  std::unordered_map<std::string, UserIndex> index_;
  std::vector<PurchaseEvent> events_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::array<std::int32_t, 3>> category_ids_;
  std::array<std::vector<std::string>, 3> category_labels_;
  Window window_;
  FilterProvenance provenance_;
};

struct IngestOptions {
  std::size_t max_purchases = 1000;
  std::optional<Window> window;  // derived from the events when absent
};

struct IngestResult {
  Dataset dataset;
  std::vector<RejectedRecord> rejected;
};

// Validates records, fills categories from the taxonomy, removes bulk
// accounts (strictly more than max_purchases events) and indexes the rest.
IngestResult ingest_and_filter(std::vector<PurchaseEvent> events,
                               std::vector<UserProfile> profiles, const Taxonomy& taxonomy,
                               const IngestOptions& options = {});

using ZipIncomeTable = std::unordered_map<std::string, std::int64_t>;  // zip -> cents
using ZipTimezoneTable = std::unordered_map<std::string, int>;         // zip -> UTC offset minutes

std::vector<UserProfile> join_income(std::vector<UserProfile> profiles, const ZipIncomeTable& table);

struct EdgeRecord {
  std::string src;
  std::string dst;
  std::int64_t count = 0;
};

// Undirected contact graph. Directed message counts are summed per unordered
// pair and pairs below the threshold are dropped.
class EmailGraph {
 public:
  using Node = std::uint32_t;
  static constexpr int kNoContact = -1;

  std::size_t node_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::optional<Node> node(std::string_view user_id) const;
  const std::string& name(Node n) const { return names_[n]; }

  struct Edge {
    Node a;
    Node b;
    std::int64_t messages;
  };
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::span<const Node> neighbors(Node n) const;
  bool connected(Node a, Node b) const;

  // Breadth-first distance from the nearest shopper: 0 for shoppers, 1 and 2
  // for first- and second-level contacts, kNoContact otherwise.
  int contact_level(Node n) const { return level_[n]; }
  // Distance between two users capped at two hops (kNoContact beyond).
  int contact_level(Node from, Node to) const;
  std::vector<Node> first_level_contacts(Node n) const;
  std::vector<Node> second_level_contacts(Node n) const;

  std::size_t dropped_self_loops() const noexcept { return self_loops_; }
  std::size_t dropped_below_threshold() const noexcept { return below_threshold_; }
  std::int64_t min_messages() const noexcept { return min_messages_; }

 private:
  friend EmailGraph build_graph(std::span<const EdgeRecord>, std::span<const std::string>,
                                std::int64_t);

  std::vector<std::string> names_;
  std::unordered_map<std::string, Node> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adj_offsets_{0};
  std::vector<Node> adj_;
  std::vector<int> level_;
  std::size_t self_loops_ = 0;
  std::size_t below_threshold_ = 0;
  std::int64_t min_messages_ = 5;
};

EmailGraph build_graph(std::span<const EdgeRecord> edge_list, std::span<const std::string> shoppers,
                       std::int64_t min_messages = 5);

}  // namespace buyflow
