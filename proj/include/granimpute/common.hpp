#pragma once

#include <cstdint>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace granimpute {

// Malformed or unusable input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration (flag values that violate documented invariants).
// The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Structured log lines on stderr: "level=info event=... <detail>".
// No timestamps so repeated runs produce identical streams.
inline void log_line(std::string_view level, std::string_view event,
                     std::string_view detail = {}) {
  std::cerr << "level=" << level << " event=" << event;
  if (!detail.empty()) std::cerr << ' ' << detail;
  std::cerr << '\n';
}
inline void log_info(std::string_view event, std::string_view detail = {}) {
  log_line("info", event, detail);
}
inline void log_warn(std::string_view event, std::string_view detail = {}) {
  log_line("warn", event, detail);
}

// Worker cap for parallel stages: GRANIMPUTE_THREADS, 0 or unset = auto.
unsigned worker_count();

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Full-token parse of a finite double. Accepts an optional leading '+'.
// Returns false for partial parses and for non-finite results.
bool parse_double(std::string_view token, double& out);

// Shortest round-trip decimal form of v (to_chars), for CSV/JSON emission.
std::string format_double(double v);

}  // namespace granimpute
