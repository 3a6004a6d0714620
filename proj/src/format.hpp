#pragma once

#include <cstdio>
#include <string>

namespace psma::detail {

// Locale-independent, shortest round-trip-ish rendering used by every report.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace psma::detail
