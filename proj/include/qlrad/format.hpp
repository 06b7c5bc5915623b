#ifndef QLRAD_FORMAT_HPP
#define QLRAD_FORMAT_HPP

#include <cstdio>
#include <string>

namespace qlrad {

// Shortest representation with 17 significant digits; locale-independent,
// deterministic across runs. Used for every CSV/JSON number the tool emits.
inline std::string fmt_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace qlrad

#endif  // QLRAD_FORMAT_HPP
