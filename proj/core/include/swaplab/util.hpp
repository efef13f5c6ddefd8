// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <string>

namespace swaplab {

/// Shortest round-trip decimal form of a double (std::to_chars), locale-free
/// and byte-stable across runs; all text artifacts use this.
inline std::string fmt_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace swaplab
