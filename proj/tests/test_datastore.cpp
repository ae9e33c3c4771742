#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "buyflow/common/error.hpp"
#include "buyflow/io.hpp"
#include "buyflow/synth.hpp"
#include "support.hpp"

using namespace buyflow;
using support::at;
using support::event;
using support::profile;

TEST(Profile, Validation) {
  EXPECT_NO_THROW(validate_profile(profile("a", Gender::Female, 30, "12345")));
  EXPECT_THROW(validate_profile(profile("a", Gender::Female, 12)), Error);
  EXPECT_THROW(validate_profile(profile("a", Gender::Female, 111)), Error);
  EXPECT_THROW(validate_profile(profile("a", Gender::Male, 30, "1234")), Error);
  EXPECT_THROW(validate_profile(profile("a", Gender::Male, 30, "12a45")), Error);
  EXPECT_THROW(validate_profile(profile("", Gender::Male)), Error);
}

TEST(Taxonomy, ConflictsAndDepth) {
  Taxonomy t;
  t.add("book", {"Books", "Fiction", "Crime"});
  EXPECT_NO_THROW(t.add("book", {"Books", "Fiction", "Crime"}));
  EXPECT_THROW(t.add("book", {"Books", "Fiction", "Romance"}), Error);
  EXPECT_THROW(t.add("mug", {"Home", "", ""}), Error);
  ASSERT_NE(t.find("book"), nullptr);
  EXPECT_EQ(t.find("book")->level3, "Crime");
}

TEST(Ingest, FiltersAndIndexes) {
  Taxonomy tax;
  tax.add("book", {"Books", "Fiction", "Crime"});
  std::vector<PurchaseEvent> events = {
      event("b", "2014-01-03", 500, "book"),
      event("a", "2014-01-02", 100, "mug"),
      event("a", "2014-01-01", 200, "book"),
      event("", "2014-01-01", 200),
      event("c", "2014-01-01", -1),
      event("c", "2013-12-31", 100),
  };
  events.push_back(event("c", "2014-01-05", 100, "x", {"Home", "", "Mugs"}));  // gap in the path
  IngestOptions o;
  o.window = Window{at("2014-01-01"), at("2014-02-01")};
  const auto r = ingest_and_filter(events, {profile("z", Gender::Female)}, tax, o);
  const auto& ds = r.dataset;
  EXPECT_EQ(r.rejected.size(), 4u);
  ASSERT_EQ(ds.user_count(), 3u);  // a, b, z
  EXPECT_EQ(ds.profile(0).user_id, "a");
  EXPECT_EQ(ds.profile(2).user_id, "z");
  EXPECT_FALSE(ds.is_shopper(2));
  EXPECT_EQ(ds.shopper_count(), 2u);
  const auto a = ds.events_of(0);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].item_id, "book");  // sorted by time
  EXPECT_EQ(a[0].category.level2, "Fiction");
  EXPECT_FALSE(a[1].category.known());
  EXPECT_EQ(ds.category_id(0, 1), *ds.find_category(1, "Books"));
  EXPECT_EQ(ds.category_label(3, ds.category_id(0, 3)), "Books > Fiction > Crime");
  EXPECT_EQ(ds.category_id(1, 1), Dataset::kUnknownCategory);
  EXPECT_EQ(ds.provenance().rejected_records, 4u);
}

TEST(Ingest, RemovesBulkAccountsEverywhere) {
  std::vector<PurchaseEvent> events;
  for (int i = 0; i < 5; ++i) events.push_back(event("store", "2014-01-01", 100 + i));
  for (int i = 0; i < 4; ++i) events.push_back(event("person", "2014-01-02", 100 + i));
  IngestOptions o;
  o.max_purchases = 4;
  const auto r = ingest_and_filter(events, {profile("store", Gender::Unknown)}, {}, o);
  EXPECT_EQ(r.dataset.user_count(), 1u);
  EXPECT_FALSE(r.dataset.index_of("store"));
  EXPECT_EQ(r.dataset.provenance().removed_users, 1u);
  EXPECT_EQ(r.dataset.provenance().removed_events, 5u);
}

TEST(Ingest, SameInstantKeepsInputOrder) {
  std::vector<PurchaseEvent> events = {event("a", "2014-01-02", 3, "x"), event("a", "2014-01-01", 1, "y"),
                                       event("a", "2014-01-02", 2, "z")};
  const auto ds = support::make_dataset(events);
  const auto a = ds.events_of(0);
  EXPECT_EQ(a[0].item_id, "y");
  EXPECT_EQ(a[1].item_id, "x");
  EXPECT_EQ(a[2].item_id, "z");
  EXPECT_EQ(ds.window().start, at("2014-01-01"));
  EXPECT_EQ(ds.window().end, at("2014-01-02") + 1);
}

TEST(Income, JoinByZip) {
  ZipIncomeTable t{{"12345", 5000000}};
  const auto p = join_income({profile("a", Gender::Male, 20, "12345"), profile("b", Gender::Male, 20, "99999"),
                              profile("c", Gender::Male)},
                             t);
  EXPECT_EQ(p[0].income_cents, 5000000);
  EXPECT_FALSE(p[1].income_cents);
  EXPECT_FALSE(p[2].income_cents);
}

TEST(Graph, ThresholdSumsDirectionsAndDropsSelfLoops) {
  const std::vector<EdgeRecord> edges = {{"a", "b", 3}, {"b", "a", 2}, {"a", "c", 4}, {"c", "c", 9},
                                         {"c", "d", 5}, {"d", "e", 7}, {"e", "f", 6}};
  const std::vector<std::string> shoppers = {"a"};
  const auto g = build_graph(edges, shoppers, 5);
  EXPECT_EQ(g.node_count(), 6u);
  EXPECT_EQ(g.edge_count(), 4u);  // a-b, c-d, d-e, e-f
  EXPECT_EQ(g.dropped_self_loops(), 1u);
  EXPECT_EQ(g.dropped_below_threshold(), 1u);
  const auto n = [&](const char* s) { return *g.node(s); };
  EXPECT_TRUE(g.connected(n("a"), n("b")));
  EXPECT_FALSE(g.connected(n("a"), n("c")));
  EXPECT_EQ(g.contact_level(n("a")), 0);
  EXPECT_EQ(g.contact_level(n("b")), 1);
  EXPECT_EQ(g.contact_level(n("c")), EmailGraph::kNoContact);
  EXPECT_EQ(g.contact_level(n("c"), n("e")), 2);
  EXPECT_EQ(g.contact_level(n("c"), n("f")), EmailGraph::kNoContact);
  EXPECT_EQ(g.second_level_contacts(n("c")), std::vector<EmailGraph::Node>{n("e")});
}

TEST(Graph, NeighboursAreSymmetric) {
  std::vector<EdgeRecord> edges;
  for (int i = 0; i < 30; ++i) edges.push_back({"u" + std::to_string(i), "u" + std::to_string((i * 7) % 30), 5});
  const auto g = build_graph(edges, std::vector<std::string>{});
  for (EmailGraph::Node a = 0; a < g.node_count(); ++a) {
    for (auto b : g.neighbors(a)) EXPECT_TRUE(g.connected(b, a));
  }
}

TEST(Io, EventsRoundTrip) {
  std::vector<PurchaseEvent> events = {event("a", "2014-01-01 10:00", 1299, "Mug, \"large\"", {"Home", "Kitchen", "Mugs"}),
                                       event("b", "2014-01-02", 5)};
  std::stringstream s;
  io::write_events(s, events);
  EXPECT_EQ(io::parse_events(s, "mem"), events);
}

TEST(Io, EventErrorsNameTheLine) {
  std::istringstream in("{\"user_id\":\"a\",\"ts\":1,\"item_id\":\"x\",\"price_cents\":5}\nnot json\n");
  try {
    io::parse_events(in, "ev.jsonl");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Io, ProfilesEdgesTaxonomyRoundTrip) {
  std::vector<UserProfile> profiles = {profile("a", Gender::Female, 31, "02139"), profile("b", Gender::Unknown)};
  std::stringstream ps;
  io::write_profiles(ps, profiles);
  const auto dir = std::filesystem::temp_directory_path() / "buyflow_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "profiles.csv") << ps.str();
  }
  EXPECT_EQ(io::read_profiles(dir / "profiles.csv"), profiles);

  std::vector<EdgeRecord> edges = {{"a", "b", 4}};
  {
    std::ofstream f(dir / "edges.csv");
    io::write_edges(f, edges);
  }
  const auto back = io::read_edges(dir / "edges.csv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].count, 4);

  Taxonomy t;
  t.add("x", {"A", "B", "C"});
  {
    std::ofstream f(dir / "taxonomy.csv");
    io::write_taxonomy(f, t);
  }
  EXPECT_EQ(io::read_taxonomy(dir / "taxonomy.csv").find("x")->level2, "B");

  {
    std::ofstream(dir / "zip_income.csv") << "zip,median_income_usd\n02139,50000\n02139,1\n";
  }
  EXPECT_THROW(io::read_zip_income(dir / "zip_income.csv"), InputError);
  std::filesystem::remove_all(dir);
}

TEST(Ingest, PropertyCapAndLosslessFiltering) {
  auto cfg = synth::preset("default");
  cfg.population = 600;
  cfg.bulk_accounts = 3;
  const auto out = synth::generate(cfg);
  std::map<std::string, std::size_t> input_counts;
  for (const auto& e : out.events) ++input_counts[e.user_id];
  for (const std::size_t cap : {5u, 20u, 1000u}) {
    IngestOptions o;
    o.max_purchases = cap;
    const auto ds = ingest_and_filter(out.events, out.profiles, out.taxonomy, o).dataset;
    for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
      EXPECT_LE(ds.event_count(u), cap);
      // A retained shopper keeps every one of their events.
      if (ds.is_shopper(u)) { EXPECT_EQ(ds.event_count(u), input_counts.at(ds.profile(u).user_id)); }
    }
  }
}

TEST(Graph, PropertyRaisingTheThresholdNeverAddsEdges) {
  auto cfg = synth::preset("default");
  cfg.population = 500;
  const auto out = synth::generate(cfg);
  std::vector<std::string> shoppers;
  for (const auto& p : out.profiles) shoppers.push_back(p.user_id);
  std::set<std::pair<std::string, std::string>> previous;
  for (std::int64_t t = 1; t <= 40; t += 3) {
    const auto g = build_graph(out.edges, shoppers, t);
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : g.edges()) edges.emplace(std::minmax(g.name(e.a), g.name(e.b)));
    if (t > 1) { EXPECT_TRUE(std::ranges::includes(previous, edges)); }
    previous = std::move(edges);
  }
}
