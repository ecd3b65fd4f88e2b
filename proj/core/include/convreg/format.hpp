#pragma once

#include <cstdio>
#include <string>

namespace convreg {

/// Fixed-precision rendering shared by every text format in the
/// project: 17 significant digits, enough to round-trip any double.
inline std::string format_g17(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace convreg
