#pragma once

#include <cstdio>
#include <string>

namespace distsynth {

// Shortest round-trip decimal form of a double. Used everywhere a float
// reaches an output stream so that equal inputs give byte-equal output.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace distsynth
