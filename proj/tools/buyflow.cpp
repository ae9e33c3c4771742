// buyflow: batch analyses over purchase logs built from e-mail receipts.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "buyflow/cohort.hpp"
#include "buyflow/common/csv.hpp"
#include "buyflow/io.hpp"
#include "buyflow/predictor.hpp"
#include "buyflow/receipt.hpp"
#include "buyflow/social.hpp"
#include "buyflow/synth.hpp"
#include "buyflow/temporal.hpp"

namespace fs = std::filesystem;
using namespace buyflow;

namespace {

void write_to(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  body(out);
  if (!out) throw Error("failed writing " + path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct DataArgs {
  std::string dir;
  std::size_t max_purchases = 1000;

  void add(CLI::App* app) {
    app->add_option("--data", dir, "Dataset directory (events.jsonl, profiles.csv, ...)")->required();
    app->add_option("--max-purchases", max_purchases, "Drop users with more purchases (bulk accounts)");
  }

  io::DataDir load() const {
    if (!fs::is_directory(dir)) throw Error("no such dataset directory: " + dir);
    IngestOptions options;
    options.max_purchases = max_purchases;
    auto d = io::load_data_dir(dir, options);
    if (!d.ingest.rejected.empty()) {
      std::cerr << fmt::format("note: {} records rejected on ingest\n", d.ingest.rejected.size());
    }
    return d;
  }
};

EmailGraph graph_of(const io::DataDir& d) {
  if (!d.has_graph) throw Error("dataset has no edges.csv");
  const auto& ds = d.ingest.dataset;
  std::vector<std::string> shoppers;
  for (Dataset::UserIndex u = 0; u < ds.user_count(); ++u) {
    if (ds.is_shopper(u)) shoppers.push_back(ds.profile(u).user_id);
  }
  return build_graph(d.edges, shoppers);
}

// "female", "male:18-24", "any:25-34", "female:30-"
cohort::UserGroup parse_group(const std::string& spec) {
  cohort::UserGroup g;
  g.label = spec;
  const auto colon = spec.find(':');
  const std::string who = spec.substr(0, colon);
  if (who == "female" || who == "male") {
    g.gender = parse_gender(who);
  } else if (who != "any") {
    throw Error("group '" + spec + "' must start with female, male or any");
  }
  if (colon != std::string::npos) {
    const std::string ages = spec.substr(colon + 1);
    const auto dash = ages.find('-');
    if (dash == std::string::npos) throw Error("age range in '" + spec + "' needs a '-'");
    try {
      if (dash > 0) g.min_age = std::stoi(ages.substr(0, dash));
      if (dash + 1 < ages.size()) g.max_age = std::stoi(ages.substr(dash + 1));
    } catch (const std::exception&) {
      throw Error("bad age range in '" + spec + "'");
    }
  }
  return g;
}

temporal::CohortRange parse_cohort(const std::string& spec) {
  temporal::CohortRange r;
  try {
    const auto dash = spec.find('-');
    if (dash == std::string::npos) {
      r.min_purchases = r.max_purchases = std::stoul(spec);
    } else {
      r.min_purchases = std::stoul(spec.substr(0, dash));
      r.max_purchases = std::stoul(spec.substr(dash + 1));
    }
  } catch (const std::exception&) {
    throw Error("bad cohort '" + spec + "' (expected N or MIN-MAX)");
  }
  if (r.min_purchases == 0 || r.max_purchases < r.min_purchases) throw Error("bad cohort '" + spec + "'");
  return r;
}

Timestamp parse_time_arg(const std::string& text) {
  const auto t = parse_utc(text);
  if (!t) throw Error("bad time '" + text + "' (expected YYYY-MM-DD[ HH:MM[:SS]])");
  return *t;
}

struct SplitArgs {
  int train_months = 6;
  int test_months = 2;
  bool no_cross = false;

  void add(CLI::App* app, bool with_test) {
    app->add_option("--train-months", train_months, "Months of training data from the window start");
    if (with_test) app->add_option("--test-months", test_months, "Months of test data after training");
    app->add_flag("--no-cross-target", no_cross, "Leave the cross-target feature out");
  }
};

std::vector<predict::Target> targets_of(const std::string& t) {
  if (t == "both") return {predict::Target::Price, predict::Target::Time};
  return {predict::parse_target(t)};
}

std::vector<int> labels_of(std::span<const predict::Instance> xs) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.label);
  return out;
}

// ---------------------------------------------------------------------------

struct ParseCmd {
  std::string templates, emails, out, errors;

  void run() const {
    const auto set = receipt::load_templates(templates);
    if (!fs::is_directory(emails)) throw Error("no such e-mail directory: " + emails);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(emails)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::ranges::sort(files);
    std::vector<PurchaseEvent> events;
    std::map<std::string, std::size_t> failures;
    std::vector<std::vector<std::string>> error_rows;
    for (const auto& f : files) {
      const std::string raw = read_file(f);
      try {
        const auto email = receipt::split_email(raw);
        if (email.recipient.empty()) {
          throw receipt::ParseError(receipt::ParseErrorKind::MalformedEmail, "no To: header");
        }
        const auto order = receipt::parse_email(raw, set);
        for (auto& e : receipt::explode_order(order, email.recipient)) events.push_back(std::move(e));
      } catch (const receipt::ParseError& e) {
        const std::string kind(receipt::error_kind_name(e.kind()));
        ++failures[kind];
        error_rows.push_back({f.filename().string(), kind, e.what()});
      }
    }
    write_to(out, [&](std::ostream& o) { io::write_events(o, events); });
    if (!errors.empty()) {
      write_to(errors, [&](std::ostream& o) {
        csv::write_row(o, {"file", "kind", "message"});
        for (const auto& r : error_rows) csv::write_row(o, r);
      });
    }
    std::cerr << fmt::format("{} e-mails, {} parsed, {} events\n", files.size(), files.size() - error_rows.size(),
                             events.size());
    for (const auto& kind : {"MalformedEmail", "NoTemplateMatch", "GrammarMismatch", "BadPrice", "BadDate"}) {
      std::cerr << fmt::format("{}: {}\n", kind, failures[kind]);
    }
  }
};

struct SynthCmd {
  std::string preset = "default", config, out, receipts, templates;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> users;

  void run() const {
    auto cfg = synth::preset(preset);
    if (!config.empty()) cfg = synth::from_json(nlohmann::json::parse(read_file(config)), cfg);
    cfg.seed = *seed;
    if (users) cfg.population = *users;
    const auto output = synth::generate(cfg);
    synth::write_output(output, out);
    if (!receipts.empty()) {
      if (templates.empty()) throw Error("--receipts needs --templates");
      const auto set = receipt::load_templates(templates);
      const auto mails = synth::render_receipts(output.events, set);
      fs::create_directories(receipts);
      for (const auto& m : mails) {
        std::ofstream f(fs::path(receipts) / (m.order_id + ".eml"), std::ios::binary);
        f << m.email;
        if (!f) throw Error("failed writing receipts to " + receipts);
      }
      std::cerr << fmt::format("{} receipts written to {}\n", mails.size(), receipts);
    }
    std::cerr << fmt::format("{} users, {} events written to {}\n", output.profiles.size(), output.events.size(), out);
  }
};

struct IngestCmd {
  DataArgs data;
  std::string out, rejected;

  void run() const {
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    write_to(out, [&](std::ostream& o) { io::write_events(o, ds.events()); });
    if (!rejected.empty()) {
      write_to(rejected, [&](std::ostream& o) {
        csv::write_row(o, {"index", "user_id", "item_id", "reason"});
        for (const auto& r : d.ingest.rejected) {
          csv::write_row(o, {std::to_string(r.index), r.event.user_id, r.event.item_id, r.reason});
        }
      });
    }
    const auto& p = ds.provenance();
    std::cerr << fmt::format("{} input events, {} kept, {} users ({} shoppers); window {} to {}\n",
                             p.input_events, ds.events().size(), ds.user_count(), ds.shopper_count(),
                             format_utc(ds.window().start), format_utc(ds.window().end));
    std::cerr << fmt::format("bulk accounts removed: {} ({} events), rejected records: {}\n", p.removed_users,
                             p.removed_events, p.rejected_records);
  }
};

struct StatsCmd {
  DataArgs data;
  std::string kind = "groups", metric = "purchases-per-user", out;
  int bins = 5;

  void run() const {
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    if (kind == "groups") {
      const auto rows = cohort::group_stats(ds, cohort::Grouping{});
      write_to(out, [&](std::ostream& o) { cohort::write_csv(o, rows); });
    } else if (kind == "distribution") {
      static const std::map<std::string, cohort::Metric> metrics = {
          {"purchases-per-user", cohort::Metric::PurchasesPerUser},
          {"spend-per-user", cohort::Metric::SpendPerUser},
          {"purchases-per-item", cohort::Metric::PurchasesPerItem}};
      const auto it = metrics.find(metric);
      if (it == metrics.end()) throw Error("unknown metric '" + metric + "'");
      const auto dist = cohort::distribution(ds, it->second, bins);
      write_to(out, [&](std::ostream& o) { cohort::write_csv(o, dist); });
    } else if (kind == "price-popularity") {
      const auto pp = cohort::price_popularity(ds, bins);
      write_to(out, [&](std::ostream& o) { cohort::write_csv(o, pp); });
      std::cerr << fmt::format("items: {}, spearman(price, purchases): {}\n", pp.items, csv::num(pp.spearman));
    } else {
      throw Error("unknown stats kind '" + kind + "'");
    }
  }
};

struct DistinctiveCmd {
  DataArgs data;
  std::string a = "female", b = "male", out;
  int level = 1;
  std::size_t top = 10;

  void run() const {
    const auto d = data.load();
    const auto r = cohort::distinctive_categories(d.ingest.dataset, parse_group(a), parse_group(b), level, top);
    write_to(out, [&](std::ostream& o) { cohort::write_csv(o, r); });
  }
};

struct IncomeCmd {
  DataArgs data;
  int buckets = 5;
  std::string out;

  void run() const {
    const auto d = data.load();
    if (!d.has_income) throw Error("dataset has no zip_income.csv");
    cohort::Grouping g;
    g.kind = cohort::Grouping::Kind::Income;
    g.income_buckets = buckets;
    const auto rows = cohort::group_stats(d.ingest.dataset, g);
    write_to(out, [&](std::ostream& o) { cohort::write_csv(o, rows); });
  }
};

struct TemporalCmd {
  DataArgs data;
  std::string granularity = "day", out;
  bool month_boundary = false;

  void run() const {
    const auto d = data.load();
    const temporal::LocalClock clock(&d.zip_timezones);
    if (month_boundary) {
      const auto rows = temporal::month_boundary_test(d.ingest.dataset, clock);
      write_to(out, [&](std::ostream& o) { temporal::write_csv(o, rows); });
      std::cerr << fmt::format("mean spend ratio: {}\n", csv::num(temporal::mean_spend_ratio(rows)));
      return;
    }
    temporal::Granularity g;
    if (granularity == "day") {
      g = temporal::Granularity::DayOfWeek;
    } else if (granularity == "hour") {
      g = temporal::Granularity::HourOfDay;
    } else {
      throw Error("granularity must be day or hour");
    }
    const auto p = temporal::activity_profile(d.ingest.dataset, g, clock);
    write_to(out, [&](std::ostream& o) { temporal::write_csv(o, p); });
    if (g == temporal::Granularity::DayOfWeek) {
      std::cerr << fmt::format("monday/sunday ratio: {}\n", csv::num(p.monday_sunday_ratio));
    }
  }
};

struct RecurringCmd {
  DataArgs data;
  std::size_t top = 20;
  bool delays = false;
  std::string out;

  void run() const {
    const auto d = data.load();
    if (delays) {
      const auto dist = temporal::delay_distribution(d.ingest.dataset);
      write_to(out, [&](std::ostream& o) { temporal::write_csv(o, dist); });
      return;
    }
    const auto items = temporal::recurring_items(d.ingest.dataset, top);
    write_to(out, [&](std::ostream& o) { temporal::write_csv(o, items); });
  }
};

struct BudgetCmd {
  DataArgs data;
  std::string cohort = "5", out;
  bool shuffle = false;
  std::optional<std::uint64_t> seed;
  std::size_t min_n = 10;

  void run() const {
    if (shuffle && !seed) throw Error("--shuffle requires --seed");
    const auto d = data.load();
    temporal::BudgetOptions o;
    o.cohort = parse_cohort(cohort);
    if (shuffle) o.shuffle_seed = *seed;
    o.curve_min_n = min_n;
    const auto c = temporal::budget_curve(d.ingest.dataset, o);
    write_to(out, [&](std::ostream& s) { temporal::write_csv(s, c); });
    std::cerr << fmt::format("users: {}, event spearman: {}, curve spearman: {}\n", c.users,
                             csv::num(c.event_spearman), csv::num(c.curve_spearman));
  }
};

struct SocialCmd {
  DataArgs data;
  std::size_t pairs = 1000;
  std::optional<std::uint64_t> seed;
  bool by_gender = false;
  std::string out;

  void run() const {
    const auto d = data.load();
    const auto graph = graph_of(d);
    social::SimilarityOptions o;
    o.n_pairs = pairs;
    o.seed = *seed;
    o.by_gender = by_gender;
    const auto r = social::cohort_similarity(d.ingest.dataset, graph, o);
    write_to(out, [&](std::ostream& s) { social::write_csv(s, r); });
  }
};

struct TrainCmd {
  DataArgs data;
  SplitArgs split;
  std::string target = "price", out;
  double alpha = 0.5;
  int bins = 5;

  void run() const {
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    const auto graph = d.has_graph ? std::optional(graph_of(d)) : std::nullopt;
    const predict::FeatureExtractor fx(ds, graph ? &*graph : nullptr);
    const auto t = predict::parse_target(target);
    const auto s = predict::TemporalSplit::from_months(ds.window(), split.train_months, 1);
    const auto train = predict::build_instances(fx, ds, {t, !split.no_cross, s.train_start, s.train_end});
    const auto model = predict::train(train, t, {alpha, bins});
    write_to(out, [&](std::ostream& o) { o << model.to_json().dump(1) << '\n'; });
    std::cerr << fmt::format("trained on {} instances\n", train.size());
  }
};

struct PredictCmd {
  DataArgs data;
  std::string model_path, user, at, out;
  bool no_cross = false;

  void run() const {
    const auto model = predict::NBModel::from_json(nlohmann::json::parse(read_file(model_path)));
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    const auto graph = d.has_graph ? std::optional(graph_of(d)) : std::nullopt;
    const predict::FeatureExtractor fx(ds, graph ? &*graph : nullptr);
    const auto u = ds.index_of(user);
    if (!u) throw Error("unknown user '" + user + "'");
    const auto fv = fx.extract(*u, parse_time_arg(at), model.target, !no_cross);
    const auto p = model.predict(fv);
    write_to(out, [&](std::ostream& o) {
      csv::write_row(o, {"user_id", "class", "probability", "predicted"});
      for (int c = 0; c < model.classifier.n_classes; ++c) {
        csv::write_row(o, {user, predict::class_label(model.target, c),
                           csv::num(p.probabilities[static_cast<std::size_t>(c)]), c == p.predicted ? "1" : "0"});
      }
    });
  }
};

struct EvaluateCmd {
  DataArgs data;
  SplitArgs split;
  std::string target = "both", out;
  double alpha = 0.5;
  int bins = 5;

  void run() const {
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    const auto graph = d.has_graph ? std::optional(graph_of(d)) : std::nullopt;
    const predict::FeatureExtractor fx(ds, graph ? &*graph : nullptr);
    const auto s = predict::TemporalSplit::from_months(ds.window(), split.train_months, split.test_months);
    std::vector<predict::EvalReport> reports;
    for (const auto t : targets_of(target)) {
      const auto train = predict::build_instances(fx, ds, {t, !split.no_cross, s.train_start, s.train_end});
      const auto test = predict::build_instances(fx, ds, {t, !split.no_cross, s.train_end, s.test_end});
      const auto model = predict::train(train, t, {alpha, bins});
      const auto labels = labels_of(train);
      reports.push_back(predict::evaluate(model, test, predict::majority_class(labels, predict::kClassCount)));
      std::cerr << fmt::format("{}: {} training and {} test instances\n", predict::target_name(t), train.size(),
                               test.size());
    }
    write_to(out, [&](std::ostream& o) { predict::write_csv(o, reports); });
  }
};

struct Chi2Cmd {
  DataArgs data;
  SplitArgs split;
  std::string target = "price", out;
  int bins = 5;

  void run() const {
    const auto d = data.load();
    const auto& ds = d.ingest.dataset;
    const auto graph = d.has_graph ? std::optional(graph_of(d)) : std::nullopt;
    const predict::FeatureExtractor fx(ds, graph ? &*graph : nullptr);
    const auto t = predict::parse_target(target);
    const auto s = predict::TemporalSplit::from_months(ds.window(), split.train_months, 1);
    const auto train = predict::build_instances(fx, ds, {t, !split.no_cross, s.train_start, s.train_end});
    const auto model = predict::train(train, t, {0.5, bins});
    const auto x = predict::discretize_all(model, train);
    std::vector<std::string> names;
    for (const auto& f : model.features) names.push_back(f.name);
    const auto ranking = predict::chi2_rank(x, labels_of(train), predict::kClassCount, names);
    write_to(out, [&](std::ostream& o) { predict::write_csv(o, ranking); });
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Purchase-behaviour analytics over e-mail receipt data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "buyflow 1.0");

  ParseCmd parse;
  auto* c = app.add_subcommand("parse", "Parse receipt e-mails into purchase events");
  c->add_option("--templates", parse.templates, "Directory of merchant templates")->required();
  c->add_option("--emails", parse.emails, "Directory of e-mails, one per file")->required();
  c->add_option("--out", parse.out, "Events JSONL (default stdout)");
  c->add_option("--errors", parse.errors, "CSV of per-file parse failures");
  c->callback([&] { parse.run(); });

  SynthCmd synth_cmd;
  c = app.add_subcommand("synth", "Generate a synthetic dataset with planted effects");
  c->add_option("--preset", synth_cmd.preset, "Scenario preset")
      ->check(CLI::IsMember(synth::preset_names()));
  c->add_option("--config", synth_cmd.config, "JSON overrides applied on top of the preset");
  c->add_option("--seed", synth_cmd.seed, "Random seed")->required();
  c->add_option("--users", synth_cmd.users, "Population size");
  c->add_option("--out", synth_cmd.out, "Output directory")->required();
  c->add_option("--receipts", synth_cmd.receipts, "Also render one e-mail per order into this directory");
  c->add_option("--templates", synth_cmd.templates, "Template directory for --receipts");
  c->callback([&] { synth_cmd.run(); });

  IngestCmd ingest;
  c = app.add_subcommand("ingest", "Validate and filter a dataset; write the kept events");
  ingest.data.add(c);
  c->add_option("--out", ingest.out, "Events JSONL (default stdout)");
  c->add_option("--rejected", ingest.rejected, "CSV of rejected records");
  c->callback([&] { ingest.run(); });

  StatsCmd stats;
  c = app.add_subcommand("stats", "Demographic group statistics and distributions");
  stats.data.add(c);
  c->add_option("--kind", stats.kind, "groups | distribution | price-popularity");
  c->add_option("--metric", stats.metric, "purchases-per-user | spend-per-user | purchases-per-item");
  c->add_option("--bins", stats.bins, "Log bins per decade (distribution) or price bins (price-popularity)");
  c->add_option("--out", stats.out, "Output CSV (default stdout)");
  c->callback([&] { stats.run(); });

  DistinctiveCmd distinctive;
  c = app.add_subcommand("distinctive", "Categories most over- or under-represented between two groups");
  distinctive.data.add(c);
  c->add_option("--a", distinctive.a, "Group A, e.g. female or male:18-24");
  c->add_option("--b", distinctive.b, "Group B");
  c->add_option("--level", distinctive.level, "Category level 1-3")->check(CLI::Range(1, 3));
  c->add_option("--top", distinctive.top, "Rows at each end");
  c->add_option("--out", distinctive.out, "Output CSV (default stdout)");
  c->callback([&] { distinctive.run(); });

  IncomeCmd income;
  c = app.add_subcommand("income", "Statistics by zip-code income bucket");
  income.data.add(c);
  c->add_option("--buckets", income.buckets, "Equal-population income buckets");
  c->add_option("--out", income.out, "Output CSV (default stdout)");
  c->callback([&] { income.run(); });

  TemporalCmd temporal_cmd;
  c = app.add_subcommand("temporal", "Purchases by local weekday or hour; month-boundary test");
  temporal_cmd.data.add(c);
  c->add_option("--granularity", temporal_cmd.granularity, "day | hour");
  c->add_flag("--month-boundary", temporal_cmd.month_boundary, "Compare first and last Mondays of each month");
  c->add_option("--out", temporal_cmd.out, "Output CSV (default stdout)");
  c->callback([&] { temporal_cmd.run(); });

  RecurringCmd recurring;
  c = app.add_subcommand("recurring", "Items bought repeatedly and their delays");
  recurring.data.add(c);
  c->add_option("--top", recurring.top, "Number of items");
  c->add_flag("--delays", recurring.delays, "Write the inter-purchase delay distribution instead");
  c->add_option("--out", recurring.out, "Output CSV (default stdout)");
  c->callback([&] { recurring.run(); });

  BudgetCmd budget;
  c = app.add_subcommand("budget-curve", "Mean normalized price against days since the previous purchase");
  budget.data.add(c);
  c->add_option("--cohort", budget.cohort, "Purchase count N or range MIN-MAX");
  c->add_flag("--shuffle", budget.shuffle, "Permute prices within each user first");
  c->add_option("--seed", budget.seed, "Seed for --shuffle");
  c->add_option("--min-n", budget.min_n, "Minimum samples for a curve point to enter the curve correlation");
  c->add_option("--out", budget.out, "Output CSV (default stdout)");
  c->callback([&] { budget.run(); });

  SocialCmd social_cmd;
  c = app.add_subcommand("social-sim", "Category similarity of connected and random user pairs");
  social_cmd.data.add(c);
  c->add_option("--pairs", social_cmd.pairs, "Pairs sampled per kind");
  c->add_option("--seed", social_cmd.seed, "Sampling seed")->required();
  c->add_flag("--by-gender", social_cmd.by_gender, "Also split connected pairs by gender");
  c->add_option("--out", social_cmd.out, "Output CSV (default stdout)");
  c->callback([&] { social_cmd.run(); });

  TrainCmd train;
  c = app.add_subcommand("train", "Train the purchase predictor on the first months of data");
  train.data.add(c);
  train.split.add(c, false);
  c->add_option("--target", train.target, "price | time");
  c->add_option("--alpha", train.alpha, "Additive smoothing");
  c->add_option("--bins", train.bins, "Quantile bins per continuous feature");
  c->add_option("--out", train.out, "Model JSON (default stdout)");
  c->callback([&] { train.run(); });

  PredictCmd predict_cmd;
  c = app.add_subcommand("predict", "Class posterior for one user at one instant");
  predict_cmd.data.add(c);
  c->add_option("--model", predict_cmd.model_path, "Model JSON from train")->required();
  c->add_option("--user", predict_cmd.user, "User id")->required();
  c->add_option("--at", predict_cmd.at, "Prediction instant (UTC)")->required();
  c->add_flag("--no-cross-target", predict_cmd.no_cross, "Leave the cross-target feature out");
  c->add_option("--out", predict_cmd.out, "Output CSV (default stdout)");
  c->callback([&] { predict_cmd.run(); });

  EvaluateCmd evaluate;
  c = app.add_subcommand("evaluate", "Train on a temporal split and compare against the baselines");
  evaluate.data.add(c);
  evaluate.split.add(c, true);
  c->add_option("--target", evaluate.target, "price | time | both");
  c->add_option("--alpha", evaluate.alpha, "Additive smoothing");
  c->add_option("--bins", evaluate.bins, "Quantile bins per continuous feature");
  c->add_option("--out", evaluate.out, "Output CSV (default stdout)");
  c->callback([&] { evaluate.run(); });

  Chi2Cmd chi2;
  c = app.add_subcommand("chi2", "Rank features by chi-squared against the class");
  chi2.data.add(c);
  chi2.split.add(c, false);
  c->add_option("--target", chi2.target, "price | time");
  c->add_option("--bins", chi2.bins, "Quantile bins per continuous feature");
  c->add_option("--out", chi2.out, "Output CSV (default stdout)");
  c->callback([&] { chi2.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "buyflow: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
