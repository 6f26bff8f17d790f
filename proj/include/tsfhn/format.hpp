#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace tsfhn {

/// 17 significant digits, the format of every number in a CSV artifact.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest text that still parses back to the same double ("0.15", not
/// "0.14999999999999999"). Used for human-facing echoes.
inline std::string fmt_short(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace tsfhn
