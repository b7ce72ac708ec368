#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

/**
 * \file util.hpp
 *
 * @brief Logging, atomic file output and a fixed-size worker pool.
 */

namespace chisd {

  enum class LogLevel { trace = 0, debug = 1, info = 2, warn = 3, error = 4, off = 5 };

  void set_log_level(LogLevel level);
  LogLevel log_level();

  /// Accepts trace|debug|info|warn|error|off.
  LogLevel parse_log_level(std::string_view name);

  void log(LogLevel level, std::string_view message);

  inline void log_debug(std::string_view m) { log(LogLevel::debug, m); }
  inline void log_info(std::string_view m) { log(LogLevel::info, m); }
  inline void log_warn(std::string_view m) { log(LogLevel::warn, m); }

  /// Writes to a sibling temporary then renames over path, so readers never observe a partial file.
  void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

  /**
   * @brief Runs fn(0) .. fn(n-1) on up to `threads` workers.
   *
   * Work items are claimed dynamically; callers that need deterministic output write results into per-index slots.
   * The first exception thrown by any item is rethrown after all workers join.
   */
  void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace chisd
