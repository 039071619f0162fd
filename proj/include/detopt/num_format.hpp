#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace detopt {

/// Format with 9 significant digits; all emitted files and reports use
/// this so diffs are stable across platforms.
inline std::string format9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// Nearest double to the 9-significant-digit decimal of v. Serializing
/// the result prints at most those digits again.
inline double round9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace detopt
