#pragma once

#include <functional>

#include <json.hpp>

namespace corstitch::log {

enum class Level { debug, info, warn, error };

/// Receives one structured event: {"level":..., "event":..., <fields>}.
using Sink = std::function<void(const nlohmann::json&)>;

/// Replace the process-wide sink; returns the previous one. A null sink drops events.
Sink set_sink(Sink sink);

/// Default sink: one JSON object per line on stderr, for warn and above.
Sink stderr_sink(Level min_level = Level::warn);

void emit(Level level, const char* event, nlohmann::json fields = nlohmann::json::object());

inline void info(const char* event, nlohmann::json fields = nlohmann::json::object()) {
    emit(Level::info, event, std::move(fields));
}
inline void warn(const char* event, nlohmann::json fields = nlohmann::json::object()) {
    emit(Level::warn, event, std::move(fields));
}

/// Installs a sink for the lifetime of the guard and restores the old one afterwards.
class ScopedSink {
public:
    explicit ScopedSink(Sink sink) : previous_(set_sink(std::move(sink))) {}
    ~ScopedSink() { set_sink(std::move(previous_)); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

}  // namespace corstitch::log
