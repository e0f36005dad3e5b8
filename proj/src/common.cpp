#include "svbrdf/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace svbrdf {

namespace {

LogLevel parse_env_level() {
  const char* env = std::getenv("SVBRDF_LOG");
  if (!env) return LogLevel::info;
  if (std::strcmp(env, "quiet") == 0) return LogLevel::quiet;
  if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
  return LogLevel::info;
}

LogLevel& level_ref() {
  static LogLevel level = parse_env_level();
  return level;
}

}  // namespace

LogLevel log_level() { return level_ref(); }
void set_log_level(LogLevel level) { level_ref() = level; }

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::fprintf(stderr, "[svbrdf] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::fprintf(stderr, "[svbrdf] %s\n", msg.c_str());
}

void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::fprintf(stderr, "[svbrdf] warning: %s\n", msg.c_str());
}

}  // namespace svbrdf
