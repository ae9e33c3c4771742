#include "buyflow/common/error.hpp"
#include "buyflow/predictor.hpp"

namespace buyflow::predict {

std::string_view target_name(Target t) { return t == Target::Price ? "price" : "time"; }

Target parse_target(std::string_view text) {
  if (text == "price") return Target::Price;
  if (text == "time") return Target::Time;
  throw Error("unknown target '" + std::string(text) + "' (expected price or time)");
}

int price_class(std::int64_t price_cents) {
  if (price_cents < 0) throw Error("negative price " + std::to_string(price_cents));
  if (price_cents < 600) return 0;
  if (price_cents < 1200) return 1;
  if (price_cents < 2000) return 2;
  if (price_cents < 4000) return 3;
  return 4;
}

int time_class(double delay_days) {
  if (!(delay_days >= 0.0)) throw Error("negative or undefined delay");
  if (delay_days < 1.0) return 0;
  if (delay_days < 5.0) return 1;
  if (delay_days < 14.0) return 2;
  if (delay_days < 33.0) return 3;
  return 4;
}

int discretize_target(double value, Target target) {
  if (value < 0.0) throw Error("target value must be non-negative");
  if (target == Target::Price) return price_class(static_cast<std::int64_t>(value));
  return time_class(value);
}

std::string class_label(Target target, int cls) {
  return (target == Target::Price ? "P" : "T") + std::to_string(cls + 1);
}

}  // namespace buyflow::predict
