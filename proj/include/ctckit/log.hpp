#pragma once

// Minimal leveled logging to stderr. The level comes from CTCKIT_LOG
// (error, warn, info, debug); default warn.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace ctckit::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level level_from_env() {
    const char* v = std::getenv("CTCKIT_LOG");
    if (!v) return Level::Warn;
    const std::string_view s(v);
    if (s == "error") return Level::Error;
    if (s == "info") return Level::Info;
    if (s == "debug" || s == "trace") return Level::Debug;
    return Level::Warn;
}

inline Level& threshold() {
    static Level lvl = level_from_env();
    return lvl;
}

inline void write(Level lvl, std::string_view msg) {
    if (lvl > threshold()) return;
    static std::mutex mu;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::lock_guard lock(mu);
    std::clog << "[ctckit " << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

inline void error(std::string_view m) { write(Level::Error, m); }
inline void warn(std::string_view m) { write(Level::Warn, m); }
inline void info(std::string_view m) { write(Level::Info, m); }
inline void debug(std::string_view m) { write(Level::Debug, m); }

}  // namespace ctckit::log
