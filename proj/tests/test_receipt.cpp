#include <gtest/gtest.h>

#include "buyflow/common/rng.hpp"
#include "buyflow/receipt.hpp"
#include "support.hpp"

using namespace buyflow;
using namespace buyflow::receipt;

namespace {

const char* kShopTemplate = R"(# test shop
merchant: shop
sender: *@shop.example
anchor: Thanks for your order
order: Order {ORDER_ID}
date: Date: {DATE}
item: {QTY} x {ITEM} - {PRICE}
anchor: Total follows
)";

TemplateSet shop_set() {
  TemplateSet set;
  set.add(parse_template(kShopTemplate, "shop.tmpl"));
  return set;
}

ParseErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ParseError raised";
  return ParseErrorKind::MalformedEmail;
}

}  // namespace

TEST(Price, Normalization) {
  EXPECT_EQ(normalize_price("$12.00"), 1200);
  EXPECT_EQ(normalize_price("1,234.56"), 123456);
  EXPECT_EQ(normalize_price("$12.99"), 1299);
  EXPECT_EQ(normalize_price("12.99 USD"), 1299);
  EXPECT_EQ(normalize_price("USD 7"), 700);
  EXPECT_EQ(normalize_price("$1,234.5"), 123450);
  EXPECT_EQ(normalize_price("$0.05"), 5);
  EXPECT_EQ(normalize_price("$1,000,000.00"), 100000000);
  for (const char* bad : {"", "$", "12.0.0", "-$3.00", "$1.2.3", "$1.999", "$12,34.00", "abc", "$1,2345", "$,123"}) {
    EXPECT_EQ(kind_of([&] { normalize_price(bad); }), ParseErrorKind::BadPrice) << bad;
  }
}

TEST(Price, RenderRoundTrips) {
  for (std::int64_t c : {0LL, 5LL, 99LL, 100LL, 123456LL, 100000000LL, 4599LL}) {
    EXPECT_EQ(normalize_price(render_price(c)), c);
  }
  EXPECT_EQ(render_price(123456), "$1,234.56");
}

TEST(Template, ParsesGrammar) {
  const auto t = parse_template(kShopTemplate, "shop.tmpl");
  EXPECT_EQ(t.merchant_id, "shop");
  ASSERT_EQ(t.body.size(), 5u);
  EXPECT_EQ(t.item_line().slots, (std::vector<Slot>{Slot::Qty, Slot::Item, Slot::Price}));
}

TEST(Template, RejectsMalformedFiles) {
  const auto bad = [](const std::string& text) {
    EXPECT_THROW(parse_template(text, "bad.tmpl"), InputError) << text;
  };
  bad("sender: a@b\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\n");                  // no merchant
  bad("merchant: m\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\n");                  // no sender
  bad("merchant: m\nsender: a@b\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\n");                   // no date
  bad("merchant: m\nsender: a@b\ndate: {DATE}\nitem: {ITEM} {PRICE}\n");                        // no order id
  bad("merchant: m\nsender: a@b\ndate: {DATE}\norder: {ORDER_ID}\n");                           // no item line
  bad("merchant: m\nsender: a@b\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM}{PRICE}\n");      // adjacent
  bad("merchant: m\nsender: a@b\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {COLOR}\n");     // unknown slot
  bad("merchant: m\nsender: a@b\nanchor: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\n");   // slot in anchor
  bad("merchant: m\nsender: a@b\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\nitem: {ITEM} {PRICE}\n");
  bad("merchant: m\nsender: a@b\ndate: {DATE}\norder: {ORDER_ID}\nitem: {ITEM} {PRICE}\ncolour: red\n");
}

TEST(Template, DuplicateMerchantIsAnError) {
  TemplateSet set = shop_set();
  EXPECT_THROW(set.add(parse_template(kShopTemplate, "again.tmpl")), Error);
}

TEST(Template, ShippedTemplatesLoad) {
  const auto set = load_templates(BUYFLOW_TEMPLATE_DIR);
  EXPECT_EQ(set.size(), 5u);
  for (const auto& t : set) EXPECT_EQ(set.match_sender(sample_sender(t.sender_pattern)), &t) << t.merchant_id;
}

TEST(Email, ParsesTwoItemReceipt) {
  const std::string raw =
      "From: Shop <orders@shop.example>\n"
      "To: alice\n"
      "Subject: hi\n"
      "\n"
      "Hello Alice,\n"
      "Thanks for your order\n"
      "Order A-17\n"
      "Date: 2014-05-06 07:08:09\n"
      "2 x Blue Mug - $8.50\n"
      "1 x Tea - Earl Grey - $1,204.00\n"
      "Total follows\n"
      "$1,221.00\n";
  const auto order = parse_email(raw, shop_set());
  EXPECT_EQ(order.merchant_id, "shop");
  EXPECT_EQ(order.order_id, "A-17");
  EXPECT_EQ(order.timestamp, support::at("2014-05-06 07:08:09"));
  ASSERT_EQ(order.lines.size(), 2u);
  EXPECT_EQ(order.lines[0], (OrderLine{"Blue Mug", 850, 2}));
  EXPECT_EQ(order.lines[1], (OrderLine{"Tea - Earl Grey", 120400, 1}));
  const auto events = explode_order(order, "alice");
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(events[0].item_id, "Blue Mug");
  EXPECT_EQ(events[2].price_cents, 120400);
  for (const auto& e : events) EXPECT_EQ(e.order_id, "A-17");
}

TEST(Email, ErrorKinds) {
  const auto set = shop_set();
  EXPECT_EQ(kind_of([&] { parse_email("Subject: x\n\nbody\n", set); }), ParseErrorKind::MalformedEmail);
  EXPECT_EQ(kind_of([&] { parse_email("From: a@other.example\n\nThanks for your order\n", set); }),
            ParseErrorKind::NoTemplateMatch);
  EXPECT_EQ(kind_of([&] { parse_email("From: a@shop.example\n\nThanks for your order\nOrder 1\n", set); }),
            ParseErrorKind::GrammarMismatch);
  EXPECT_EQ(kind_of([&] {
              parse_email("From: a@shop.example\n\nThanks for your order\nOrder 1\nDate: 2014-05-06\n"
                          "1 x Mug - $8.5.0\nTotal follows\n",
                          set);
            }),
            ParseErrorKind::BadPrice);
  EXPECT_EQ(kind_of([&] {
              parse_email("From: a@shop.example\n\nThanks for your order\nOrder 1\nDate: 2014-02-30\n"
                          "1 x Mug - $8.50\nTotal follows\n",
                          set);
            }),
            ParseErrorKind::BadDate);
}

TEST(Email, SenderMatchIsCaseInsensitive) {
  const auto set = shop_set();
  EXPECT_NE(set.match_sender("Orders@SHOP.example"), nullptr);
  EXPECT_EQ(set.match_sender("orders@shop.example.evil"), nullptr);
}

TEST(Email, RenderThenParseRecoversOrder) {
  const auto set = load_templates(BUYFLOW_TEMPLATE_DIR);
  ParsedOrder order;
  order.order_id = "X-1";
  order.timestamp = support::at("2014-09-10 11:12:13");
  order.lines = {{"Reading Lamp", 3999, 1}, {"Bulb 60W", 299, 3}, {"Cable (2m)", 100000, 1}};
  for (const auto& t : set) {
    order.merchant_id = t.merchant_id;
    const auto raw = render_email(t, order, "bob");
    const auto parsed = parse_email(raw, set);
    EXPECT_EQ(parsed.merchant_id, t.merchant_id);
    EXPECT_EQ(parsed.order_id, order.order_id);
    EXPECT_EQ(parsed.timestamp, order.timestamp);
    EXPECT_EQ(explode_order(parsed, "bob"), explode_order(order, "bob")) << t.merchant_id << "\n" << raw;
    EXPECT_EQ(split_email(raw).recipient, "bob");
  }
}

TEST(Explode, PropertyLengthIsSumOfQuantities) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    ParsedOrder order;
    order.merchant_id = "shop";
    order.order_id = "o" + std::to_string(trial);
    order.timestamp = 1400000000 + trial;
    int total = 0;
    for (std::uint64_t i = 0, n = 1 + rng.below(6); i < n; ++i) {
      const int q = 1 + static_cast<int>(rng.below(5));
      order.lines.push_back({"item " + std::to_string(i), static_cast<std::int64_t>(rng.below(100000)), q});
      total += q;
    }
    const auto events = explode_order(order, "u");
    ASSERT_EQ(events.size(), static_cast<std::size_t>(total));
    for (const auto& e : events) {
      EXPECT_EQ(e.order_id, order.order_id);
      EXPECT_EQ(e.timestamp, order.timestamp);
    }
  }
}

TEST(Price, PropertyIdempotentOnCanonicalRendering) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const auto cents = static_cast<std::int64_t>(rng.below(1'000'000'000));
    const auto once = render_price(normalize_price(render_price(cents)));
    EXPECT_EQ(once, render_price(cents));
  }
}
