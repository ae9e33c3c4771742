#include <gtest/gtest.h>

#include <cmath>

#include "buyflow/common/error.hpp"
#include "buyflow/common/rng.hpp"
#include "buyflow/social.hpp"
#include "buyflow/synth.hpp"
#include "support.hpp"

using namespace buyflow;
using namespace buyflow::social;
using support::event;

namespace {

CategoryPath leaf(const char* a, const char* b = "", const char* c = "") { return {a, b, c}; }

CategoryVector vec(std::vector<std::pair<std::int32_t, double>> e) { return {1, std::move(e)}; }

}  // namespace

TEST(CategoryVector, CountsAtLevel) {
  const auto ds = support::make_dataset({
      event("u", "2014-01-01T00:00:00Z", 1, "i1", leaf("A", "A1", "A1x")),
      event("u", "2014-01-02T00:00:00Z", 1, "i2", leaf("A", "A2")),
      event("u", "2014-01-03T00:00:00Z", 1, "i3", leaf("B", "B1", "B1x")),
      event("u", "2014-01-04T00:00:00Z", 1, "i4"),
  });
  const auto v1 = category_vector(ds, 0, 1);
  ASSERT_EQ(v1.entries.size(), 2u);
  EXPECT_EQ(ds.category_label(1, v1.entries[0].first), "A");
  EXPECT_DOUBLE_EQ(v1.entries[0].second, 2.0);
  EXPECT_DOUBLE_EQ(v1.entries[1].second, 1.0);

  double sum1 = 0.0, sum3 = 0.0;
  for (const auto& [k, c] : v1.entries) sum1 += c;
  for (const auto& [k, c] : category_vector(ds, 0, 3).entries) sum3 += c;
  EXPECT_DOUBLE_EQ(sum1, 3.0);
  EXPECT_DOUBLE_EQ(sum3, 2.0);
}

TEST(CategoryVector, UncategorizedUserThrows) {
  const auto ds = support::make_dataset({event("u", "2014-01-01T00:00:00Z", 1)});
  EXPECT_THROW(category_vector(ds, 0, 1), Error);
}

TEST(Cosine, HandValues) {
  EXPECT_DOUBLE_EQ(cosine(vec({{0, 1}, {1, 1}}), vec({{0, 1}, {2, 1}})), 0.5);
  EXPECT_DOUBLE_EQ(cosine(vec({{0, 3}, {1, 4}}), vec({{0, 3}, {1, 4}})), 1.0);
  EXPECT_DOUBLE_EQ(cosine(vec({{0, 1}}), vec({{1, 5}})), 0.0);
  EXPECT_THROW(cosine(vec({}), vec({{0, 1}})), Error);
}

TEST(Cosine, PropertySymmetricAndScaleInvariant) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    CategoryVector a{1, {}}, b{1, {}};
    for (std::int32_t k = 0; k < 12; ++k) {
      if (rng.bernoulli(0.5)) a.entries.emplace_back(k, 1.0 + static_cast<double>(rng.below(20)));
      if (rng.bernoulli(0.5)) b.entries.emplace_back(k, 1.0 + static_cast<double>(rng.below(20)));
    }
    if (a.empty() || b.empty()) continue;
    const double ab = cosine(a, b);
    EXPECT_EQ(ab, cosine(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0 + 1e-15);
    auto scaled = a;
    const double c = 0.1 + 10.0 * rng.uniform();
    for (auto& [k, v] : scaled.entries) v *= c;
    EXPECT_NEAR(cosine(a, scaled), 1.0, 1e-12);
  }
}

TEST(PairSimilarities, ParallelMatchesSerial) {
  Rng rng(9);
  std::vector<CategoryVector> vectors(300);
  for (auto& v : vectors) {
    for (std::int32_t k = 0; k < 30; ++k) {
      if (rng.bernoulli(0.2)) v.entries.emplace_back(k, 1.0 + static_cast<double>(rng.below(5)));
    }
    if (v.empty()) v.entries.emplace_back(0, 1.0);
  }
  std::vector<UserPair> pairs;
  for (int i = 0; i < 5000; ++i) {
    pairs.emplace_back(static_cast<Dataset::UserIndex>(rng.below(300)), static_cast<Dataset::UserIndex>(rng.below(300)));
  }
  EXPECT_EQ(pair_similarities(vectors, pairs), pair_similarities_serial(vectors, pairs));
}

TEST(CohortSimilarity, NoEdgesThrows) {
  auto cfg = synth::preset("null");
  cfg.population = 200;
  const auto out = synth::generate(cfg);
  const auto in = synth::ingest(out);
  const EmailGraph empty = build_graph({}, {});
  EXPECT_THROW(cohort_similarity(in.dataset, empty, {10, 1, false}), Error);
  EXPECT_THROW(cohort_similarity(in.dataset, in.graph, {1000000, 1, false}), Error);
}

TEST(CohortSimilarity, CompleteGraphLeavesNoRandomPairs) {
  std::vector<PurchaseEvent> events;
  std::vector<EdgeRecord> edges;
  std::vector<std::string> users = {"a", "b", "c"};
  for (const auto& u : users) events.push_back(event(u, "2014-01-01T00:00:00Z", 1, "i", leaf("A", "B", "C")));
  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = i + 1; j < users.size(); ++j) edges.push_back({users[i], users[j], 10});
  }
  const auto ds = support::make_dataset(events);
  const auto graph = build_graph(edges, users);
  EXPECT_THROW(cohort_similarity(ds, graph, {2, 1, false}), Error);
}

TEST(CohortSimilarity, PropertySeededAndBounded) {
  auto cfg = synth::preset("homophily");
  cfg.population = 1500;
  const auto in = synth::ingest(synth::generate(cfg));
  const SimilarityOptions opt{500, 17, true};
  const auto a = cohort_similarity(in.dataset, in.graph, opt);
  const auto b = cohort_similarity(in.dataset, in.graph, opt);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(a.levels[l].connected_mean, b.levels[l].connected_mean);
    EXPECT_EQ(a.levels[l].random_mean, b.levels[l].random_mean);
    EXPECT_GE(a.levels[l].random_mean, 0.0);
    EXPECT_LE(a.levels[l].connected_mean, 1.0);
    EXPECT_NEAR(a.levels[l].lift, a.levels[l].connected_mean / a.levels[l].random_mean - 1.0, 1e-15);
  }
  ASSERT_EQ(a.gender_pairs.size(), 4u);
  EXPECT_EQ(a.gender_pairs.back().pair, "random");
}

TEST(CohortSimilarity, PropertyNullDataShowsNoLift) {
  auto cfg = synth::preset("null");
  cfg.population = 3000;
  cfg.count_min = 10;
  const auto in = synth::ingest(synth::generate(cfg));
  const auto r = cohort_similarity(in.dataset, in.graph, {2000, 8, false});
  for (const auto& l : r.levels) {
    const double se = std::hypot(l.connected_se, l.random_se);
    EXPECT_LE(std::fabs(l.connected_mean - l.random_mean), 2.0 * se) << "level " << l.level;
  }
}
