#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace svbrdf {

// Bad or missing input data (files, shapes, formats). CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (singular matrices, non-finite losses). CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

// Controlled by the SVBRDF_LOG environment variable (quiet|info|debug).
LogLevel log_level();
void set_log_level(LogLevel level);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);
void log_warn(const std::string& msg);

}  // namespace svbrdf

#define SVBRDF_REQUIRE(cond, msg)                  \
  do {                                             \
    if (!(cond)) throw ::svbrdf::DataError(msg);   \
  } while (0)

#define SVBRDF_NUMERIC_REQUIRE(cond, msg)           \
  do {                                              \
    if (!(cond)) throw ::svbrdf::NumericError(msg); \
  } while (0)
