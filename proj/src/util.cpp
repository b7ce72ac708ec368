#include "chisd/util.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include "chisd/core.hpp"

namespace chisd {

  RankDeficiencyError::RankDeficiencyError(std::size_t index, double pivot)
      : Error("gram_schmidt: rank deficiency at vector " + std::to_string(index) + " (relative pivot " + std::to_string(pivot) + ")"),
        index_(index),
        pivot_(pivot) {}

  LicqError::LicqError(const std::string& what, double condition_estimate)
      : Error(what + " (condition estimate " + std::to_string(condition_estimate) + ")"), condition_(condition_estimate) {}

  namespace {
    std::atomic<int> g_level{static_cast<int>(LogLevel::warn)};
    std::mutex g_log_mutex;

    constexpr std::string_view level_name(LogLevel l) {
      switch (l) {
        case LogLevel::trace:
          return "trace";
        case LogLevel::debug:
          return "debug";
        case LogLevel::info:
          return "info";
        case LogLevel::warn:
          return "warn";
        case LogLevel::error:
          return "error";
        case LogLevel::off:
          return "off";
      }
      return "?";
    }
  }  // namespace

  void set_log_level(LogLevel level) { g_level.store(static_cast<int>(level)); }

  LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

  LogLevel parse_log_level(std::string_view name) {
    for (auto l : {LogLevel::trace, LogLevel::debug, LogLevel::info, LogLevel::warn, LogLevel::error, LogLevel::off}) {
      if (name == level_name(l)) {
        return l;
      }
    }
    throw Error("unknown log level '" + std::string(name) + "'");
  }

  void log(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) < g_level.load() || level == LogLevel::off) {
      return;
    }
    std::lock_guard lock(g_log_mutex);
    std::clog << "[chisd:" << level_name(level) << "] " << message << '\n';
  }

  void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw IoError("cannot open '" + tmp.string() + "' for writing");
      }
      out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      out.flush();
      if (!out) {
        throw IoError("write failed for '" + tmp.string() + "'");
      }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
      throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
  }

  void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
      for (std::size_t i = 0; i < n; ++i) {
        fn(i);
      }
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      const std::size_t workers = std::min(threads, n);
      pool.reserve(workers);
      for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < n; i = next++) {
            try {
              fn(i);
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!first_error) {
                first_error = std::current_exception();
              }
            }
          }
        });
      }
    }
    if (first_error) {
      std::rethrow_exception(first_error);
    }
  }

}  // namespace chisd
