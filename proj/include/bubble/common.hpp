#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bubble {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Error categories. Everything numerical that can fail throws one of these;
// the CLI maps them to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct chart_domain_error : numerical_error {
  using numerical_error::numerical_error;
};
struct nonconvergence_error : numerical_error {
  using numerical_error::numerical_error;
};
struct resolution_error : numerical_error {
  using numerical_error::numerical_error;
};
struct regime_error : numerical_error {
  using numerical_error::numerical_error;
};
struct graph_breakdown_error : numerical_error {
  using numerical_error::numerical_error;
};

// Log verbosity from BUBBLE_LOG: 0 quiet (default), 1 info, 2 debug.
inline int log_level() {
  static int level = [] {
    const char* env = std::getenv("BUBBLE_LOG");
    if (!env) return 0;
    std::string s(env);
    if (s == "debug" || s == "2") return 2;
    if (s == "info" || s == "1") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[bubble] " << msg << "\n";
}
inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[bubble:debug] " << msg << "\n";
}

// FNV-1a, used to stamp reports/outputs with the config they came from.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bubble
