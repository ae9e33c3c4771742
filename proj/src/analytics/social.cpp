#include "buyflow/social.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <map>
#include <ostream>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"
#include "buyflow/common/rng.hpp"
#include "buyflow/common/stats.hpp"

namespace buyflow::social {

CategoryVector category_vector(const Dataset& ds, Dataset::UserIndex user, int level) {
  if (level < 1 || level > 3) throw Error("category level must be 1, 2 or 3");
  std::map<std::int32_t, double> counts;
  const std::size_t first = ds.first_event(user);
  for (std::size_t i = first; i < first + ds.event_count(user); ++i) {
    const auto c = ds.category_id(i, level);
    if (c != Dataset::kUnknownCategory) counts[c] += 1.0;
  }
  if (counts.empty()) {
    throw Error("user " + ds.profile(user).user_id + " has no categorized purchases at level " +
                std::to_string(level));
  }
  CategoryVector v;
  v.level = level;
  v.entries.assign(counts.begin(), counts.end());
  return v;
}

double cosine(const CategoryVector& a, const CategoryVector& b) {
  if (a.empty() || b.empty()) throw Error("cosine of an empty category vector");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a.entries) na += v * v;
  for (const auto& [k, v] : b.entries) nb += v * v;
  auto i = a.entries.begin();
  auto j = b.entries.begin();
  while (i != a.entries.end() && j != b.entries.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

std::vector<double> pair_similarities_serial(std::span<const CategoryVector> vectors,
                                             std::span<const UserPair> pairs) {
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i] = cosine(vectors[pairs[i].first], vectors[pairs[i].second]);
  }
  return out;
}

std::vector<double> pair_similarities(std::span<const CategoryVector> vectors, std::span<const UserPair> pairs) {
  std::vector<double> out(pairs.size());
  const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = cosine(vectors[p.first], vectors[p.second]);
  }
  return out;
}

namespace {

std::pair<double, double> mean_and_se(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  return {stats::mean(xs), stats::stddev_sample(xs) / std::sqrt(static_cast<double>(xs.size()))};
}

}  // namespace

SimilarityReport cohort_similarity(const Dataset& ds, const EmailGraph& graph, const SimilarityOptions& options) {
  if (options.n_pairs == 0) throw Error("n_pairs must be positive");

  std::vector<char> qualifies(ds.user_count(), 0);
  std::vector<Dataset::UserIndex> eligible;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    const std::size_t first = ds.first_event(u);
    for (std::size_t i = first; i < first + ds.event_count(u); ++i) {
      if (ds.category_id(i, 3) != Dataset::kUnknownCategory) {
        qualifies[u] = 1;
        eligible.push_back(u);
        break;
      }
    }
  }

  // Graph nodes are mapped onto dataset users once.
  std::vector<std::int64_t> node_user(graph.node_count(), -1);
  for (EmailGraph::Node n = 0; n < graph.node_count(); ++n) {
    if (auto u = ds.index_of(graph.name(n))) node_user[n] = *u;
  }
  std::vector<UserPair> candidates;
  for (const auto& e : graph.edges()) {
    const auto a = node_user[e.a];
    const auto b = node_user[e.b];
    if (a < 0 || b < 0 || !qualifies[static_cast<std::size_t>(a)] || !qualifies[static_cast<std::size_t>(b)]) {
      continue;
    }
    candidates.emplace_back(static_cast<Dataset::UserIndex>(a), static_cast<Dataset::UserIndex>(b));
  }
  if (candidates.size() < options.n_pairs) {
    throw Error("only " + std::to_string(candidates.size()) + " connected shopper pairs available, " +
                std::to_string(options.n_pairs) + " requested (short by " +
                std::to_string(options.n_pairs - candidates.size()) + ")");
  }

  Rng rng(mix_seed(options.seed, 0));
  for (std::size_t i = 0; i < options.n_pairs; ++i) {
    std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
  }
  candidates.resize(options.n_pairs);

  const auto is_connected = [&](Dataset::UserIndex a, Dataset::UserIndex b) {
    const auto na = graph.node(ds.profile(a).user_id);
    const auto nb = graph.node(ds.profile(b).user_id);
    return na && nb && graph.connected(*na, *nb);
  };
  if (eligible.size() < 2) throw Error("fewer than two qualifying shoppers");
  std::vector<UserPair> random_pairs;
  random_pairs.reserve(options.n_pairs);
  Rng pair_rng(mix_seed(options.seed, 1));
  std::size_t attempts = 0;
  while (random_pairs.size() < options.n_pairs) {
    if (++attempts > 1000 * options.n_pairs + 1000) {
      throw Error("could not sample enough unconnected random pairs");
    }
    const auto a = eligible[pair_rng.below(eligible.size())];
    const auto b = eligible[pair_rng.below(eligible.size())];
    if (a == b || is_connected(a, b)) continue;
    random_pairs.emplace_back(a, b);
  }

  SimilarityReport report;
  std::vector<CategoryVector> vectors(ds.user_count());
  for (int level = 1; level <= 3; ++level) {
    const auto n_eligible = static_cast<std::int64_t>(eligible.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n_eligible; ++i) {
      const auto u = eligible[static_cast<std::size_t>(i)];
      vectors[u] = category_vector(ds, u, level);
    }
    const auto connected = pair_similarities(vectors, candidates);
    const auto random = pair_similarities(vectors, random_pairs);
    auto& row = report.levels[static_cast<std::size_t>(level - 1)];
    row.level = level;
    row.n = options.n_pairs;
    std::tie(row.connected_mean, row.connected_se) = mean_and_se(connected);
    std::tie(row.random_mean, row.random_se) = mean_and_se(random);
    row.lift = row.random_mean > 0.0 ? row.connected_mean / row.random_mean - 1.0 : 0.0;

    if (level == 3 && options.by_gender) {
      std::vector<double> ff, mm, fm;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Gender ga = ds.profile(candidates[i].first).gender;
        const Gender gb = ds.profile(candidates[i].second).gender;
        if (ga == Gender::Unknown || gb == Gender::Unknown) continue;
        if (ga == Gender::Female && gb == Gender::Female) {
          ff.push_back(connected[i]);
        } else if (ga == Gender::Male && gb == Gender::Male) {
          mm.push_back(connected[i]);
        } else {
          fm.push_back(connected[i]);
        }
      }
      const auto add = [&](std::string name, const std::vector<double>& xs) {
        const auto [m, se] = mean_and_se(xs);
        report.gender_pairs.push_back({std::move(name), m, se, xs.size()});
      };
      add("female-female", ff);
      add("male-male", mm);
      add("female-male", fm);
      add("random", random);
    }
  }
  return report;
}

void write_csv(std::ostream& out, const SimilarityReport& report) {
  out << "level,cohort,mean,se,n\n";
  for (const auto& l : report.levels) {
    const auto level = std::to_string(l.level);
    csv::write_row(out, {level, "connected", csv::num(l.connected_mean), csv::num(l.connected_se), std::to_string(l.n)});
    csv::write_row(out, {level, "random", csv::num(l.random_mean), csv::num(l.random_se), std::to_string(l.n)});
    csv::write_row(out, {level, "lift", csv::num(l.lift), "", std::to_string(l.n)});
  }
  for (const auto& g : report.gender_pairs) {
    csv::write_row(out, {"3", g.pair, csv::num(g.mean), csv::num(g.se), std::to_string(g.n)});
  }
}

}  // namespace buyflow::social
