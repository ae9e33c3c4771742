#include "buyflow/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "buyflow/common/csv.hpp"
#include "buyflow/common/error.hpp"

namespace buyflow::io {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string(), 0, "cannot open file");
  return in;
}

std::int64_t to_int(const csv::Table& t, std::size_t row, std::string_view text) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw InputError(t.path, t.line_numbers[row], "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::string string_field(const nlohmann::json& obj, const char* key, bool required,
                         const std::string& source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw InputError(source, line, std::string("missing field '") + key + "'");
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw InputError(source, line, std::string("field '") + key + "' must be a string");
}

std::int64_t int_field(const nlohmann::json& obj, const char* key, const std::string& source,
                       std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw InputError(source, line, std::string("field '") + key + "' must be an integer");
  }
  return it->get<std::int64_t>();
}

}  // namespace

std::vector<PurchaseEvent> parse_events(std::istream& in, const std::string& source) {
  std::vector<PurchaseEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(source, lineno, e.what());
    }
    if (!obj.is_object()) throw InputError(source, lineno, "expected a JSON object");
    PurchaseEvent e;
    e.user_id = string_field(obj, "user_id", true, source, lineno);
    e.timestamp = int_field(obj, "ts", source, lineno);
    e.item_id = string_field(obj, "item_id", true, source, lineno);
    e.item_name = string_field(obj, "item_name", false, source, lineno);
    e.price_cents = int_field(obj, "price_cents", source, lineno);
    e.order_id = string_field(obj, "order_id", false, source, lineno);
    e.merchant_id = string_field(obj, "merchant_id", false, source, lineno);
    e.category.level1 = string_field(obj, "cat1", false, source, lineno);
    e.category.level2 = string_field(obj, "cat2", false, source, lineno);
    e.category.level3 = string_field(obj, "cat3", false, source, lineno);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<PurchaseEvent> read_events(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_events(in, path.string());
}

std::string event_to_json(const PurchaseEvent& e) {
  nlohmann::ordered_json obj;
  obj["user_id"] = e.user_id;
  obj["ts"] = e.timestamp;
  obj["item_id"] = e.item_id;
  obj["item_name"] = e.item_name;
  obj["price_cents"] = e.price_cents;
  obj["order_id"] = e.order_id;
  obj["merchant_id"] = e.merchant_id;
  const auto cat = [](const std::string& s) { return s.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(s); };
  obj["cat1"] = cat(e.category.level1);
  obj["cat2"] = cat(e.category.level2);
  obj["cat3"] = cat(e.category.level3);
  return obj.dump();
}

void write_events(std::ostream& out, std::span<const PurchaseEvent> events) {
  for (const auto& e : events) out << event_to_json(e) << '\n';
}

std::vector<UserProfile> read_profiles(const std::filesystem::path& path) {
  const auto t = csv::read(path.string());
  const auto c_user = t.column("user_id");
  const auto c_gender = t.column("gender");
  const auto c_age = t.column("age");
  const auto c_zip = t.column("zip");
  std::vector<UserProfile> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    UserProfile p;
    p.user_id = row[c_user];
    p.gender = parse_gender(row[c_gender]);
    if (!row[c_age].empty() && row[c_age] != "unknown") p.age = static_cast<int>(to_int(t, r, row[c_age]));
    if (!row[c_zip].empty() && row[c_zip] != "unknown") p.zip = row[c_zip];
    try {
      validate_profile(p);
    } catch (const Error& e) {
      throw InputError(t.path, t.line_numbers[r], e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

void write_profiles(std::ostream& out, std::span<const UserProfile> profiles) {
  out << "user_id,gender,age,zip\n";
  for (const auto& p : profiles) {
    csv::write_row(out, {p.user_id, std::string(gender_name(p.gender)),
                         p.age ? std::to_string(*p.age) : std::string(), p.zip.value_or("")});
  }
}

ZipIncomeTable read_zip_income(const std::filesystem::path& path) {
  const auto t = csv::read(path.string());
  const auto c_zip = t.column("zip");
  const auto c_income = t.column("median_income_usd");
  ZipIncomeTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::int64_t usd = to_int(t, r, row[c_income]);
    if (!table.emplace(row[c_zip], usd * 100).second) {
      throw InputError(t.path, t.line_numbers[r], "duplicate zip '" + row[c_zip] + "'");
    }
  }
  return table;
}

ZipTimezoneTable read_zip_timezones(const std::filesystem::path& path) {
  const auto t = csv::read(path.string());
  const auto c_zip = t.column("zip");
  const auto c_offset = t.column("utc_offset_minutes");
  ZipTimezoneTable table;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!table.emplace(row[c_zip], static_cast<int>(to_int(t, r, row[c_offset]))).second) {
      throw InputError(t.path, t.line_numbers[r], "duplicate zip '" + row[c_zip] + "'");
    }
  }
  return table;
}

std::vector<EdgeRecord> read_edges(const std::filesystem::path& path) {
  const auto t = csv::read(path.string());
  const auto c_src = t.column("src");
  const auto c_dst = t.column("dst");
  const auto c_count = t.column("count");
  std::vector<EdgeRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto count = to_int(t, r, row[c_count]);
    if (count < 0) throw InputError(t.path, t.line_numbers[r], "negative message count");
    out.push_back({row[c_src], row[c_dst], count});
  }
  return out;
}

void write_edges(std::ostream& out, std::span<const EdgeRecord> edges) {
  out << "src,dst,count\n";
  for (const auto& e : edges) csv::write_row(out, {e.src, e.dst, std::to_string(e.count)});
}

Taxonomy read_taxonomy(const std::filesystem::path& path) {
  const auto t = csv::read(path.string());
  const auto c_item = t.column("item_id");
  const auto c1 = t.column("cat1");
  const auto c2 = t.column("cat2");
  const auto c3 = t.column("cat3");
  Taxonomy tax;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      tax.add(row[c_item], {row[c1], row[c2], row[c3]});
    } catch (const Error& e) {
      throw InputError(t.path, t.line_numbers[r], e.what());
    }
  }
  return tax;
}

void write_taxonomy(std::ostream& out, const Taxonomy& taxonomy) {
  std::vector<std::pair<std::string, CategoryPath>> rows(taxonomy.items().begin(), taxonomy.items().end());
  std::ranges::sort(rows, {}, &std::pair<std::string, CategoryPath>::first);
  out << "item_id,cat1,cat2,cat3\n";
  for (const auto& [item, c] : rows) csv::write_row(out, {item, c.level1, c.level2, c.level3});
}

DataDir load_data_dir(const std::filesystem::path& dir, const IngestOptions& options) {
  namespace fs = std::filesystem;
  DataDir out;
  auto events = read_events(dir / "events.jsonl");
  std::vector<UserProfile> profiles;
  if (fs::exists(dir / "profiles.csv")) profiles = read_profiles(dir / "profiles.csv");
  Taxonomy taxonomy;
  if (fs::exists(dir / "taxonomy.csv")) taxonomy = read_taxonomy(dir / "taxonomy.csv");
  if (fs::exists(dir / "zip_income.csv")) {
    out.zip_income = read_zip_income(dir / "zip_income.csv");
    out.has_income = true;
    profiles = join_income(std::move(profiles), out.zip_income);
  }
  if (fs::exists(dir / "zip_timezone.csv")) out.zip_timezones = read_zip_timezones(dir / "zip_timezone.csv");
  if (fs::exists(dir / "edges.csv")) {
    out.edges = read_edges(dir / "edges.csv");
    out.has_graph = true;
  }
  out.ingest = ingest_and_filter(std::move(events), std::move(profiles), taxonomy, options);
  return out;
}

}  // namespace buyflow::io
