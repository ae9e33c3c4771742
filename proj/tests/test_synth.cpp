#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "buyflow/common/error.hpp"
#include "buyflow/io.hpp"
#include "buyflow/receipt.hpp"
#include "buyflow/synth.hpp"

using namespace buyflow;
using namespace buyflow::synth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("buyflow_synth_" + name);
  fs::remove_all(dir);
  return dir;
}

SynthConfig small(const char* name, std::size_t population = 300) {
  auto cfg = preset(name);
  cfg.population = population;
  return cfg;
}

}  // namespace

TEST(Config, Validation) {
  const auto bad = [](auto mutate) {
    SynthConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), Error);
    EXPECT_THROW(generate(c), Error);
  };
  bad([](SynthConfig& c) { c.shopper_fraction = 1.5; });
  bad([](SynthConfig& c) { c.female_share = -0.1; });
  bad([](SynthConfig& c) { c.population = 0; });
  bad([](SynthConfig& c) { c.homophily = 0.7, c.gender_taste = 0.5; });
  bad([](SynthConfig& c) { c.start_date = "2014-02-31"; });
  bad([](SynthConfig& c) { c.budget = true, c.budget_min_horizon_days = 0.0; });
  bad([](SynthConfig& c) { c.consumable_jitter_days = 40.0; });
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_THROW(preset("nope"), Error);
}

TEST(Config, JsonRoundTripAndUnknownKeys) {
  const auto cfg = preset("budget");
  const auto back = from_json(nlohmann::json::parse(to_json(cfg).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(cfg).dump());
  EXPECT_THROW(from_json(nlohmann::json{{"popul", 3}}), Error);
  EXPECT_THROW(from_json(nlohmann::json{{"population", "many"}}), Error);
  EXPECT_EQ(from_json(nlohmann::json{{"seed", 9}}, cfg).population, cfg.population);
}

TEST(Generate, SameSeedSameFiles) {
  const auto cfg = small("default");
  const auto a = scratch("a");
  const auto b = scratch("b");
  write_output(generate(cfg), a);
  write_output(generate(cfg), b);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
    ++files;
  }
  EXPECT_EQ(files, 7u);

  auto other = cfg;
  other.seed = cfg.seed + 1;
  const auto c = scratch("c");
  write_output(generate(other), c);
  EXPECT_NE(slurp(a / "events.jsonl"), slurp(c / "events.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST(Generate, FilesLoadLikeTheInMemoryIngest) {
  auto cfg = small("default");
  cfg.bulk_accounts = 1;
  const auto out = generate(cfg);
  const auto dir = scratch("load");
  write_output(out, dir);
  const auto loaded = io::load_data_dir(dir);
  const auto in = ingest(out);
  EXPECT_EQ(loaded.ingest.dataset.events(), in.dataset.events());
  EXPECT_EQ(loaded.ingest.dataset.users(), in.dataset.users());
  EXPECT_EQ(in.dataset.provenance().removed_users, 1u);
  EXPECT_EQ(out.ground_truth["events"].get<std::size_t>(), out.events.size());
  fs::remove_all(dir);
}

TEST(Generate, EventsAreWellFormed) {
  const auto out = generate(small("default"));
  std::map<std::string, Timestamp> last;
  std::map<std::string, std::pair<Timestamp, std::string>> orders;
  for (const auto& e : out.events) {
    ASSERT_GE(e.price_cents, 0);
    ASSERT_TRUE(e.category.known());
    if (auto it = last.find(e.user_id); it != last.end()) { EXPECT_LE(it->second, e.timestamp); }
    last[e.user_id] = e.timestamp;
    auto [it, fresh] = orders.try_emplace(e.order_id, e.timestamp, e.merchant_id);
    if (!fresh) {
      EXPECT_EQ(it->second.first, e.timestamp);
      EXPECT_EQ(it->second.second, e.merchant_id);
    }
  }
  for (const auto& p : out.profiles) EXPECT_NO_THROW(validate_profile(p));
}

TEST(Render, OneEmailPerOrderAndExactRoundTrip) {
  auto cfg = small("default", 200);
  cfg.multi_item_order_prob = 0.5;
  const auto out = generate(cfg);
  const auto templates = receipt::load_templates(BUYFLOW_TEMPLATE_DIR);
  const auto mails = render_receipts(out.events, templates);
  std::set<std::string> order_ids;
  for (const auto& e : out.events) order_ids.insert(e.order_id);
  EXPECT_EQ(mails.size(), order_ids.size());

  std::vector<PurchaseEvent> parsed;
  bool multi = false;
  for (const auto& m : mails) {
    const auto order = receipt::parse_email(m.email, templates);
    multi |= order.lines.size() > 1;
    EXPECT_EQ(order.order_id, m.order_id);
    for (auto& e : receipt::explode_order(order, m.user_id)) parsed.push_back(std::move(e));
  }
  EXPECT_TRUE(multi);
  ASSERT_EQ(parsed.size(), out.events.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const auto& a = parsed[i];
    const auto& b = out.events[i];
    EXPECT_EQ(a.user_id, b.user_id);
    EXPECT_EQ(a.item_name, b.item_name);
    EXPECT_EQ(a.price_cents, b.price_cents);
    EXPECT_EQ(a.timestamp, b.timestamp);
    EXPECT_EQ(a.order_id, b.order_id);
    EXPECT_EQ(a.merchant_id, b.merchant_id);
  }
}

TEST(Render, UnknownMerchantThrows) {
  auto out = generate(small("null", 50));
  ASSERT_FALSE(out.events.empty());
  out.events.front().merchant_id = "nowhere";
  const auto templates = receipt::load_templates(BUYFLOW_TEMPLATE_DIR);
  EXPECT_THROW(render_receipts(out.events, templates), Error);
}
