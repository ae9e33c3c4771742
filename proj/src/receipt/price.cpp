#include <string>

#include "buyflow/receipt.hpp"

namespace buyflow::receipt {

namespace {

[[noreturn]] void bad_price(std::string_view text, std::string_view why) {
  throw ParseError(ParseErrorKind::BadPrice,
                   "bad price '" + std::string(text) + "': " + std::string(why));
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::int64_t normalize_price(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) bad_price(text, "empty");
  if (s.front() == '-' || s.find('-') != std::string_view::npos) bad_price(text, "negative");
  if (s.front() == '$') s.remove_prefix(1);
  if (s.starts_with("USD")) s.remove_prefix(3);
  if (s.ends_with("USD")) s.remove_suffix(3);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) bad_price(text, "no digits");

  const auto dot = s.find('.');
  if (dot != std::string_view::npos && s.find('.', dot + 1) != std::string_view::npos) {
    bad_price(text, "multiple decimal points");
  }
  const std::string_view whole = s.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty()) bad_price(text, "no integer digits");
  if (frac.size() > 2) bad_price(text, "more than two decimal digits");

  // Thousands separators must split the integer part into groups of three.
  std::int64_t units = 0;
  std::size_t group = 0;
  bool grouped = false;
  for (std::size_t i = 0; i < whole.size(); ++i) {
    const char c = whole[i];
    if (c == ',') {
      if (i == 0 || (grouped && group != 3)) bad_price(text, "misplaced thousands separator");
      grouped = true;
      group = 0;
      continue;
    }
    if (!is_digit(c)) bad_price(text, "non-digit character");
    ++group;
    if (units > (INT64_MAX - 9) / 10) bad_price(text, "overflow");
    units = units * 10 + (c - '0');
  }
  if (grouped && group != 3) bad_price(text, "misplaced thousands separator");

  std::int64_t cents = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    cents *= 10;
    if (i < frac.size()) {
      if (!is_digit(frac[i])) bad_price(text, "non-digit character");
      cents += frac[i] - '0';
    }
  }
  if (units > (INT64_MAX - 99) / 100) bad_price(text, "overflow");
  return units * 100 + cents;
}

std::string render_price(std::int64_t cents) {
  const std::string digits = std::to_string(cents / 100);
  std::string grouped;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) grouped += ',';
    grouped += digits[i];
  }
  const std::int64_t rem = cents % 100;
  return "$" + grouped + "." + (rem < 10 ? "0" : "") + std::to_string(rem);
}

}  // namespace buyflow::receipt
