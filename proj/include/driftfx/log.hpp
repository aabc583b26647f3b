#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace driftfx {

// Verbosity is controlled by the DRIFT_FX_LOG environment variable:
// off | error | warn | info | debug (default: warn).
enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

inline LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("DRIFT_FX_LOG");
        if (!env) return LogLevel::warn;
        if (std::strcmp(env, "off") == 0) return LogLevel::off;
        if (std::strcmp(env, "error") == 0) return LogLevel::error;
        if (std::strcmp(env, "warn") == 0) return LogLevel::warn;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

inline void log_msg(LogLevel at, const std::string& msg) {
    static const char* names[] = {"off", "error", "warn", "info", "debug"};
    if (log_level() >= at && at != LogLevel::off)
        std::fprintf(stderr, "[driftfx %s] %s\n", names[static_cast<int>(at)], msg.c_str());
}

inline void log_error(const std::string& m) { log_msg(LogLevel::error, m); }
inline void log_warn(const std::string& m) { log_msg(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_msg(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_msg(LogLevel::debug, m); }

}  // namespace driftfx
