#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace parapde {

enum class DerivTag { none, x, xx, xxx, xxxx, y, yy, xy };

inline int deriv_order_x(DerivTag t) {
  switch (t) {
    case DerivTag::x: return 1;
    case DerivTag::xx: return 2;
    case DerivTag::xxx: return 3;
    case DerivTag::xxxx: return 4;
    case DerivTag::xy: return 1;
    default: return 0;
  }
}

inline int deriv_order_y(DerivTag t) {
  switch (t) {
    case DerivTag::y: return 1;
    case DerivTag::yy: return 2;
    case DerivTag::xy: return 1;
    default: return 0;
  }
}

inline std::string deriv_suffix(DerivTag t) {
  switch (t) {
    case DerivTag::none: return "";
    case DerivTag::x: return "x";
    case DerivTag::xx: return "xx";
    case DerivTag::xxx: return "xxx";
    case DerivTag::xxxx: return "xxxx";
    case DerivTag::y: return "y";
    case DerivTag::yy: return "yy";
    case DerivTag::xy: return "xy";
  }
  throw std::invalid_argument("deriv_suffix: unknown tag");
}

inline DerivTag deriv_tag_for_order(int order) {
  switch (order) {
    case 0: return DerivTag::none;
    case 1: return DerivTag::x;
    case 2: return DerivTag::xx;
    case 3: return DerivTag::xxx;
    case 4: return DerivTag::xxxx;
  }
  throw std::invalid_argument("deriv_tag_for_order: order must be 0..4");
}

// One candidate library column: a monomial in the data fields times at most
// one derivative factor. Display names look like "u^2*u_xx" or "u*w_y".
struct TermDescriptor {
  struct Factor {
    std::string field;
    int power = 1;
    bool operator==(const Factor&) const = default;
  };

  std::vector<Factor> base;  // empty means the monomial 1
  std::string deriv_field;   // empty means no derivative factor
  DerivTag deriv = DerivTag::none;

  bool operator==(const TermDescriptor&) const = default;

  std::string display() const {
    std::string out;
    auto append = [&out](const std::string& part) {
      if (!out.empty()) out += "*";
      out += part;
    };
    for (const Factor& f : base) {
      if (f.power <= 0) continue;
      std::string part = f.field;
      if (f.power > 1) part += "^" + std::to_string(f.power);
      append(part);
    }
    if (!deriv_field.empty() && deriv != DerivTag::none)
      append(deriv_field + "_" + deriv_suffix(deriv));
    return out.empty() ? "1" : out;
  }
};

}  // namespace parapde
