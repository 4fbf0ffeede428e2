#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace treeheat {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed float formatting for reproducible CSV output: 17 significant
/// digits, '.' decimal separator.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(std::string_view data) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

}  // namespace treeheat
