#pragma once

#include <charconv>
#include <string>

namespace srcbench {

// Shortest decimal form that round-trips, independent of the C locale.
// Keeps CSV output byte-stable across runs and machines.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace srcbench
