#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace signvar {

/// 17 significant digits; round-trips any double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest text that parses back to v, for labels.
inline std::string format_short(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace signvar
