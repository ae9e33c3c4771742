#include <algorithm>
#include <deque>
#include <map>

#include "buyflow/common/error.hpp"
#include "buyflow/datastore.hpp"

namespace buyflow {

std::optional<EmailGraph::Node> EmailGraph::node(std::string_view user_id) const {
  auto it = index_.find(std::string(user_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const EmailGraph::Node> EmailGraph::neighbors(Node n) const {
  return std::span<const Node>(adj_).subspan(adj_offsets_[n], adj_offsets_[n + 1] - adj_offsets_[n]);
}

bool EmailGraph::connected(Node a, Node b) const {
  const auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

int EmailGraph::contact_level(Node from, Node to) const {
  if (from == to) return 0;
  if (connected(from, to)) return 1;
  for (Node mid : neighbors(from)) {
    if (connected(mid, to)) return 2;
  }
  return kNoContact;
}

std::vector<EmailGraph::Node> EmailGraph::first_level_contacts(Node n) const {
  const auto nb = neighbors(n);
  return {nb.begin(), nb.end()};
}

std::vector<EmailGraph::Node> EmailGraph::second_level_contacts(Node n) const {
  std::vector<Node> out;
  for (Node mid : neighbors(n)) {
    for (Node far : neighbors(mid)) {
      if (far != n && !connected(n, far)) out.push_back(far);
    }
  }
  std::ranges::sort(out);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EmailGraph build_graph(std::span<const EdgeRecord> edge_list, std::span<const std::string> shoppers,
                       std::int64_t min_messages) {
  EmailGraph g;
  g.min_messages_ = min_messages;

  std::vector<std::string> names(shoppers.begin(), shoppers.end());
  for (const auto& e : edge_list) {
    if (e.count < 0) throw Error("edge " + e.src + " -> " + e.dst + " has a negative count");
    names.push_back(e.src);
    names.push_back(e.dst);
  }
  std::ranges::sort(names);
  names.erase(std::unique(names.begin(), names.end()), names.end());
  g.names_ = std::move(names);
  for (EmailGraph::Node n = 0; n < g.names_.size(); ++n) g.index_[g.names_[n]] = n;

  std::map<std::pair<EmailGraph::Node, EmailGraph::Node>, std::int64_t> pair_counts;
  for (const auto& e : edge_list) {
    const auto a = g.index_.at(e.src);
    const auto b = g.index_.at(e.dst);
    if (a == b) {
      ++g.self_loops_;
      continue;
    }
    pair_counts[{std::min(a, b), std::max(a, b)}] += e.count;
  }

  std::vector<std::size_t> degree(g.names_.size(), 0);
  for (const auto& [pair, count] : pair_counts) {
    if (count < min_messages) {
      ++g.below_threshold_;
      continue;
    }
    g.edges_.push_back({pair.first, pair.second, count});
    ++degree[pair.first];
    ++degree[pair.second];
  }

  g.adj_offsets_.assign(g.names_.size() + 1, 0);
  for (std::size_t n = 0; n < degree.size(); ++n) g.adj_offsets_[n + 1] = g.adj_offsets_[n] + degree[n];
  g.adj_.assign(g.adj_offsets_.back(), 0);
  std::vector<std::size_t> fill(g.adj_offsets_.begin(), g.adj_offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.adj_[fill[e.a]++] = e.b;
    g.adj_[fill[e.b]++] = e.a;
  }
  for (std::size_t n = 0; n < g.names_.size(); ++n) {
    std::sort(g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_offsets_[n]),
              g.adj_.begin() + static_cast<std::ptrdiff_t>(g.adj_offsets_[n + 1]));
  }

  // Multi-source BFS from all shoppers, two hops deep.
  g.level_.assign(g.names_.size(), EmailGraph::kNoContact);
  std::deque<EmailGraph::Node> queue;
  for (const auto& s : shoppers) {
    const auto n = g.index_.at(s);
    if (g.level_[n] != 0) {
      g.level_[n] = 0;
      queue.push_back(n);
    }
  }
  while (!queue.empty()) {
    const auto n = queue.front();
    queue.pop_front();
    if (g.level_[n] >= 2) continue;
    for (auto m : g.neighbors(n)) {
      if (g.level_[m] == EmailGraph::kNoContact) {
        g.level_[m] = g.level_[n] + 1;
        queue.push_back(m);
      }
    }
  }
  return g;
}

}  // namespace buyflow
