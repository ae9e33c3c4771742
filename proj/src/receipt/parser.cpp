#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "buyflow/receipt.hpp"

namespace buyflow::receipt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string bare_address(std::string_view value) {
  const auto open = value.find('<');
  const auto close = value.rfind('>');
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    return trim(value.substr(open + 1, close - open - 1));
  }
  return trim(value);
}

bool header_is(std::string_view line, std::string_view name) {
  if (line.size() <= name.size() || line[name.size()] != ':') return false;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) != name[i]) return false;
  }
  return true;
}

struct Captures {
  std::optional<std::string> item, price, qty, order_id, date;
};

bool match_line(const GrammarLine& g, const std::string& line, Captures& out) {
  std::smatch m;
  if (!std::regex_match(line, m, g.matcher)) return false;
  for (std::size_t i = 0; i < g.slots.size(); ++i) {
    std::string value = m[i + 1].str();
    switch (g.slots[i]) {
      case Slot::Item: out.item = std::move(value); break;
      case Slot::Price: out.price = std::move(value); break;
      case Slot::Qty: out.qty = std::move(value); break;
      case Slot::OrderId: out.order_id = std::move(value); break;
      case Slot::Date: out.date = std::move(value); break;
    }
  }
  return true;
}

std::string fill(const std::string& pattern, Slot slot, std::string_view value) {
  std::string out = pattern;
  const auto token = slot_name(slot);
  const auto pos = out.find(token);
  if (pos != std::string::npos) out.replace(pos, token.size(), value);
  return out;
}

}  // namespace

std::string_view error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedEmail: return "MalformedEmail";
    case ParseErrorKind::NoTemplateMatch: return "NoTemplateMatch";
    case ParseErrorKind::GrammarMismatch: return "GrammarMismatch";
    case ParseErrorKind::BadPrice: return "BadPrice";
    case ParseErrorKind::BadDate: return "BadDate";
  }
  return "Unknown";
}

Email split_email(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  Email email;
  bool first = true;
  bool in_headers = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_headers) {
      if (first) {
        if (!header_is(line, "from")) {
          throw ParseError(ParseErrorKind::MalformedEmail, "first line must be a From: header");
        }
        email.sender = bare_address(std::string_view(line).substr(5));
        first = false;
      } else if (trim(line).empty()) {
        in_headers = false;
      } else if (header_is(line, "to")) {
        email.recipient = bare_address(std::string_view(line).substr(3));
      }
      continue;
    }
    email.body_lines.push_back(line);
  }
  if (first || email.sender.empty()) {
    throw ParseError(ParseErrorKind::MalformedEmail, "missing sender");
  }
  return email;
}

ParsedOrder apply_template(const Template& tmpl, const Email& email) {
  ParsedOrder order;
  order.merchant_id = tmpl.merchant_id;
  std::optional<std::string> date_text;
  std::optional<std::string> order_id;

  const auto& body = tmpl.body;
  std::size_t cursor = 0;
  std::size_t items_seen = 0;

  auto consume = [&](const GrammarLine& g, Captures& c) {
    if (c.date) date_text = c.date;
    if (c.order_id) order_id = c.order_id;
    if (g.kind == GrammarLine::Kind::Item) {
      OrderLine line;
      line.item_name = *c.item;
      line.price_cents = normalize_price(*c.price);
      if (c.qty) {
        line.quantity = std::stoi(*c.qty);
        if (line.quantity < 1) {
          throw ParseError(ParseErrorKind::GrammarMismatch, "quantity must be at least 1");
        }
      }
      order.lines.push_back(std::move(line));
      ++items_seen;
    }
  };

  for (const auto& raw : email.body_lines) {
    if (cursor >= body.size()) break;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    Captures c;
    const bool in_items = body[cursor].kind == GrammarLine::Kind::Item && items_seen > 0;
    if (in_items && cursor + 1 < body.size() && match_line(body[cursor + 1], line, c)) {
      consume(body[cursor + 1], c);
      cursor += 2;
      continue;
    }
    if (match_line(body[cursor], line, c)) {
      consume(body[cursor], c);
      if (body[cursor].kind != GrammarLine::Kind::Item) ++cursor;
    }
  }
  const bool finished = cursor >= body.size() ||
                        (cursor + 1 == body.size() &&
                         body[cursor].kind == GrammarLine::Kind::Item && items_seen > 0);
  if (!finished) {
    throw ParseError(ParseErrorKind::GrammarMismatch,
                     "template '" + tmpl.merchant_id + "': line not found: '" +
                         body[cursor].pattern + "'");
  }
  const auto ts = parse_utc(*date_text);
  if (!ts) throw ParseError(ParseErrorKind::BadDate, "bad date '" + *date_text + "'");
  order.timestamp = *ts;
  order.order_id = *order_id;
  return order;
}

ParsedOrder parse_email(std::string_view raw, const TemplateSet& templates) {
  const Email email = split_email(raw);
  const Template* tmpl = templates.match_sender(email.sender);
  if (!tmpl) {
    throw ParseError(ParseErrorKind::NoTemplateMatch, "no template for sender '" + email.sender + "'");
  }
  return apply_template(*tmpl, email);
}

std::vector<PurchaseEvent> explode_order(const ParsedOrder& order, std::string_view user_id) {
  std::vector<PurchaseEvent> events;
  for (const auto& line : order.lines) {
    for (int unit = 0; unit < line.quantity; ++unit) {
      PurchaseEvent e;
      e.user_id = user_id;
      e.timestamp = order.timestamp;
      e.item_id = line.item_name;
      e.item_name = line.item_name;
      e.price_cents = line.price_cents;
      e.order_id = order.order_id;
      e.merchant_id = order.merchant_id;
      events.push_back(std::move(e));
    }
  }
  return events;
}

std::string sample_sender(std::string_view glob) {
  std::string out;
  for (std::size_t i = 0; i < glob.size(); ++i) {
    const char c = glob[i];
    if (c == '*') {
      out += "orders";
    } else if (c == '?') {
      out += 'x';
    } else if (c == '[') {
      const auto close = glob.find(']', i + 1);
      if (close == std::string_view::npos) {
        out += c;
        continue;
      }
      std::size_t first = i + 1;
      if (first < close && (glob[first] == '!' || glob[first] == '^')) {
        out += '_';  // any char outside a negated set
      } else if (first < close) {
        out += glob[first];
      }
      i = close;
    } else if (c == '\\' && i + 1 < glob.size()) {
      out += glob[++i];
    } else {
      out += c;
    }
  }
  return out;
}

std::string render_email(const Template& tmpl, const ParsedOrder& order,
                         std::string_view recipient) {
  std::ostringstream out;
  out << "From: " << sample_sender(tmpl.sender_pattern) << '\n';
  if (!recipient.empty()) out << "To: " << recipient << '\n';
  out << "Subject: Your " << tmpl.merchant_id << " order " << order.order_id << "\n\n";
  const std::string date = format_utc(order.timestamp);
  for (const auto& g : tmpl.body) {
    if (g.kind == GrammarLine::Kind::Item) {
      const bool has_qty = std::ranges::count(g.slots, Slot::Qty) > 0;
      for (const auto& line : order.lines) {
        std::string text = fill(g.pattern, Slot::Item, line.item_name);
        text = fill(text, Slot::Price, render_price(line.price_cents));
        if (has_qty) {
          out << fill(text, Slot::Qty, std::to_string(line.quantity)) << '\n';
        } else {
          for (int u = 0; u < line.quantity; ++u) out << text << '\n';
        }
      }
      continue;
    }
    std::string text = fill(g.pattern, Slot::Date, date);
    text = fill(text, Slot::OrderId, order.order_id);
    out << text << '\n';
  }
  return out.str();
}

}  // namespace buyflow::receipt
