#include "jcns/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace jcns {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Warning};
std::mutex g_mutex;
}  // namespace

void set_log_level(LogLevel level) noexcept { g_level = level; }
LogLevel log_level() noexcept { return g_level; }

void log_message(LogLevel level, std::string_view message) {
    if (level < g_level.load()) {
        return;
    }
    static constexpr const char* kNames[] = {"debug", "info", "warning", ""};
    std::lock_guard lock(g_mutex);
    std::clog << "[jcns " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

}  // namespace jcns
