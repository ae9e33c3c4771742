#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "buyflow/common/error.hpp"
#include "buyflow/common/time.hpp"
#include "buyflow/event.hpp"

namespace buyflow::receipt {

enum class Slot { Item, Price, Qty, OrderId, Date };

std::string_view slot_name(Slot slot);

// One line of a receipt body grammar. Anchor lines are pure literals; the
// others contain capture slots written as {ITEM}, {PRICE}, {QTY}, {ORDER_ID}
// or {DATE}.
struct GrammarLine {
  enum class Kind { Anchor, Date, Order, Item };

  Kind kind = Kind::Anchor;
  std::string pattern;
  std::vector<Slot> slots;  // in order of appearance
  std::regex matcher;       // full-line matcher, one capture group per slot
};

struct Template {
  std::string merchant_id;
  std::string sender_pattern;  // glob over the sender address
  std::vector<GrammarLine> body;
  std::string source;  // file the template was read from

  const GrammarLine& item_line() const;
};

// Templates in load order (sorted by file name); sender matching picks the
// first template whose glob accepts the address.
class TemplateSet {
 public:
  void add(Template tmpl);

  const Template* match_sender(std::string_view address) const;
  const Template* find(std::string_view merchant_id) const;

  std::size_t size() const noexcept { return templates_.size(); }
  bool empty() const noexcept { return templates_.empty(); }
  auto begin() const { return templates_.begin(); }
  auto end() const { return templates_.end(); }

 private:
  std::vector<Template> templates_;
};

struct OrderLine {
  std::string item_name;
  std::int64_t price_cents = 0;
  int quantity = 1;

  bool operator==(const OrderLine&) const = default;
};

struct ParsedOrder {
  std::string merchant_id;
  std::string order_id;
  Timestamp timestamp = 0;
  std::vector<OrderLine> lines;
};

enum class ParseErrorKind { MalformedEmail, NoTemplateMatch, GrammarMismatch, BadPrice, BadDate };

std::string_view error_kind_name(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

// Parses one template file body. Throws InputError with the offending line.
Template parse_template(std::string_view text, const std::string& source);

// Loads every regular file in `dir` (sorted by name). Duplicate merchant ids
// and malformed files raise InputError naming the file.
TemplateSet load_templates(const std::filesystem::path& dir);

struct Email {
  std::string sender;  // bare address
  std::string recipient;  // from an optional "To:" header; may be empty
  std::vector<std::string> body_lines;
};

// First line must be "From: <address>"; headers end at the first blank line.
Email split_email(std::string_view raw);

ParsedOrder parse_email(std::string_view raw, const TemplateSet& templates);
ParsedOrder apply_template(const Template& tmpl, const Email& email);

// "$1,234.56" -> 123456. Throws ParseError(BadPrice).
std::int64_t normalize_price(std::string_view text);

// Canonical rendering understood by normalize_price: "$1,234.56".
std::string render_price(std::int64_t cents);

// One event per unit of quantity; all events share the order id and time.
std::vector<PurchaseEvent> explode_order(const ParsedOrder& order, std::string_view user_id);

// Inverse of apply_template for a template: produces an email whose parse
// yields `order` exactly. Item names must be single-line.
std::string render_email(const Template& tmpl, const ParsedOrder& order,
                         std::string_view recipient);

// Example sender address accepted by a glob ('*' -> "orders", '?' -> 'x').
std::string sample_sender(std::string_view glob);

}  // namespace buyflow::receipt
