#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <json.hpp>

namespace macfb {

/// Round to 12 significant digits; report JSON carries quantized numbers so
/// that emit -> parse -> emit is a fixed point.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::strtod(buf, nullptr);
}

/// JSON has no infinities; encode them as strings.
inline nlohmann::json num12(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return round12(v);
}

inline double parse_num(const nlohmann::json& j) {
  if (j.is_null()) return std::nan("");
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    return std::strtod(s.c_str(), nullptr);
  }
  return j.get<double>();
}

}  // namespace macfb
