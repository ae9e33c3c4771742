#include <cctype>
#include <algorithm>
#include <fnmatch.h>
#include <fstream>
#include <sstream>

#include "buyflow/receipt.hpp"

namespace buyflow::receipt {

namespace {

struct SlotSpec {
  std::string_view token;
  Slot slot;
  std::string_view regex;
};

constexpr SlotSpec kSlots[] = {
    {"{ITEM}", Slot::Item, "(.+?)"},       {"{PRICE}", Slot::Price, "(\\S+)"},
    {"{QTY}", Slot::Qty, "(\\d+)"},        {"{ORDER_ID}", Slot::OrderId, "(\\S+)"},
    {"{DATE}", Slot::Date, "(.+?)"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string escape_regex(std::string_view literal) {
  std::string out;
  for (char c : literal) {
    if (std::string_view("\\^$.|?*+()[]{}").find(c) != std::string_view::npos) out += '\\';
    out += c;
  }
  return out;
}

GrammarLine compile_line(GrammarLine::Kind kind, const std::string& pattern,
                         const std::string& source, std::size_t lineno) {
  GrammarLine line;
  line.kind = kind;
  line.pattern = pattern;
  std::string regex;
  std::size_t pos = 0;
  bool previous_was_slot = false;
  while (pos < pattern.size()) {
    const SlotSpec* hit = nullptr;
    if (pattern[pos] == '{') {
      for (const auto& spec : kSlots) {
        if (std::string_view(pattern).substr(pos).starts_with(spec.token)) hit = &spec;
      }
      if (!hit) throw InputError(source, lineno, "unknown slot in '" + pattern + "'");
    }
    if (hit) {
      if (previous_was_slot) {
        throw InputError(source, lineno, "adjacent slots need a literal between them");
      }
      line.slots.push_back(hit->slot);
      regex += hit->regex;
      pos += hit->token.size();
      previous_was_slot = true;
    } else {
      const auto next = pattern.find('{', pos);
      const auto end = next == std::string::npos ? pattern.size() : next;
      regex += escape_regex(std::string_view(pattern).substr(pos, end - pos));
      pos = end;
      previous_was_slot = false;
    }
  }
  line.matcher = std::regex(regex, std::regex::ECMAScript | std::regex::optimize);
  return line;
}

std::size_t count_slot(const std::vector<GrammarLine>& body, Slot slot) {
  std::size_t n = 0;
  for (const auto& line : body) n += std::ranges::count(line.slots, slot);
  return n;
}

}  // namespace

std::string_view slot_name(Slot slot) {
  for (const auto& spec : kSlots) {
    if (spec.slot == slot) return spec.token;
  }
  return "{?}";
}

const GrammarLine& Template::item_line() const {
  for (const auto& line : body) {
    if (line.kind == GrammarLine::Kind::Item) return line;
  }
  throw Error("template '" + merchant_id + "' has no item line");
}

Template parse_template(std::string_view text, const std::string& source) {
  Template tmpl;
  tmpl.source = source;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  std::size_t item_lines = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw InputError(source, lineno, "expected 'key: value'");
    const std::string key = trim(std::string_view(line).substr(0, colon));
    const std::string value = trim(std::string_view(line).substr(colon + 1));
    if (value.empty()) throw InputError(source, lineno, "empty value for '" + key + "'");

    if (key == "merchant") {
      if (!tmpl.merchant_id.empty()) throw InputError(source, lineno, "duplicate merchant line");
      tmpl.merchant_id = value;
    } else if (key == "sender") {
      if (!tmpl.sender_pattern.empty()) throw InputError(source, lineno, "duplicate sender line");
      tmpl.sender_pattern = value;
    } else if (key == "anchor") {
      if (value.find('{') != std::string::npos) {
        throw InputError(source, lineno, "anchor lines are literal; slots are not allowed");
      }
      tmpl.body.push_back(compile_line(GrammarLine::Kind::Anchor, value, source, lineno));
    } else if (key == "date" || key == "order" || key == "item") {
      const auto kind = key == "date"    ? GrammarLine::Kind::Date
                        : key == "order" ? GrammarLine::Kind::Order
                                         : GrammarLine::Kind::Item;
      auto compiled = compile_line(kind, value, source, lineno);
      const auto has = [&](Slot s) { return std::ranges::count(compiled.slots, s) > 0; };
      if (kind == GrammarLine::Kind::Item) {
        ++item_lines;
        if (!has(Slot::Item) || !has(Slot::Price)) {
          throw InputError(source, lineno, "item line must contain {ITEM} and {PRICE}");
        }
        if (has(Slot::Date) || has(Slot::OrderId)) {
          throw InputError(source, lineno, "item line may only use {ITEM}, {QTY}, {PRICE}");
        }
      } else {
        if (kind == GrammarLine::Kind::Date && !has(Slot::Date)) {
          throw InputError(source, lineno, "date line must contain {DATE}");
        }
        if (kind == GrammarLine::Kind::Order && !has(Slot::OrderId)) {
          throw InputError(source, lineno, "order line must contain {ORDER_ID}");
        }
        if (has(Slot::Item) || has(Slot::Price) || has(Slot::Qty)) {
          throw InputError(source, lineno, "item slots are only allowed on the item line");
        }
      }
      for (Slot s : compiled.slots) {
        if (std::ranges::count(compiled.slots, s) > 1) {
          throw InputError(source, lineno, "slot " + std::string(slot_name(s)) + " repeated");
        }
      }
      tmpl.body.push_back(std::move(compiled));
    } else {
      throw InputError(source, lineno, "unknown key '" + key + "'");
    }
  }
  if (tmpl.merchant_id.empty()) throw InputError(source, 0, "missing merchant line");
  if (tmpl.sender_pattern.empty()) throw InputError(source, 0, "missing sender line");
  if (item_lines != 1) throw InputError(source, 0, "exactly one item line is required");
  if (count_slot(tmpl.body, Slot::Date) != 1) {
    throw InputError(source, 0, "exactly one {DATE} slot is required");
  }
  if (count_slot(tmpl.body, Slot::OrderId) != 1) {
    throw InputError(source, 0, "exactly one {ORDER_ID} slot is required");
  }
  return tmpl;
}

void TemplateSet::add(Template tmpl) {
  if (find(tmpl.merchant_id)) {
    throw InputError(tmpl.source, 0, "duplicate merchant '" + tmpl.merchant_id + "'");
  }
  templates_.push_back(std::move(tmpl));
}

const Template* TemplateSet::match_sender(std::string_view address) const {
  std::string addr(address);
  std::ranges::transform(addr, addr.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& t : templates_) {
    std::string glob = t.sender_pattern;
    std::ranges::transform(glob, glob.begin(), [](unsigned char c) { return std::tolower(c); });
    if (::fnmatch(glob.c_str(), addr.c_str(), 0) == 0) return &t;
  }
  return nullptr;
}

const Template* TemplateSet::find(std::string_view merchant_id) const {
  for (const auto& t : templates_) {
    if (t.merchant_id == merchant_id) return &t;
  }
  return nullptr;
}

TemplateSet load_templates(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError(dir.string(), 0, "not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::ranges::sort(files);
  TemplateSet set;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw InputError(file.string(), 0, "cannot open template");
    std::stringstream buf;
    buf << in.rdbuf();
    set.add(parse_template(buf.str(), file.string()));
  }
  return set;
}

}  // namespace buyflow::receipt
