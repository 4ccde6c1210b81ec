#pragma once

#include <functional>
#include <string_view>

namespace docconv {

enum class LogLevel { info, warning, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Default sink writes "[level] message" lines to stderr.
// Returns the sink being replaced.
LogSink set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);

inline void log_info(std::string_view m) { log(LogLevel::info, m); }
inline void log_warning(std::string_view m) { log(LogLevel::warning, m); }

}  // namespace docconv
