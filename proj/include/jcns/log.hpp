#pragma once

#include <string_view>

namespace jcns {

enum class LogLevel { Debug = 0, Info = 1, Warning = 2, Silent = 3 };

void set_log_level(LogLevel level) noexcept;
LogLevel log_level() noexcept;

void log_message(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log_message(LogLevel::Info, m); }
inline void log_warning(std::string_view m) { log_message(LogLevel::Warning, m); }

}  // namespace jcns
