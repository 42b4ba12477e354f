#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace repauc::detail {

// Locale-independent number formatting for prompts and CSV output.

inline std::string format_fixed(double x, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  if (res.ec != std::errc{}) return "nan";
  return {buf, res.ptr};
}

// Shortest representation that round-trips.
inline std::string format_shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) return "nan";
  return {buf, res.ptr};
}

} // namespace repauc::detail
