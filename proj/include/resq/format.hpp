#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "resq/device/lattice.hpp"

namespace resq {

// Locale-independent, 9 significant digits ("%.9g" in the C locale).
inline std::string fmt9(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// Site label without commas, safe inside CSV fields: (1,2) -> "1:2".
inline std::string site_label(const SiteId& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ':';
    out += std::to_string(s[k]);
  }
  return out;
}

inline std::string junction_label(const SiteId& a, const SiteId& b) {
  return site_label(a) + "-" + site_label(b);
}

}  // namespace resq
