#include "corstitch/log.hpp"
#include "corstitch/error.hpp"

#include <iostream>
#include <mutex>

namespace corstitch {

const char* stage_name(Stage stage) noexcept {
    switch (stage) {
        case Stage::config: return "config";
        case Stage::ingest: return "ingest";
        case Stage::registration: return "registration";
        case Stage::stitch: return "stitch";
        case Stage::georef: return "georef";
        case Stage::kmz: return "kmz";
        case Stage::synth: return "synth";
        case Stage::verify: return "verify";
    }
    return "unknown";
}

namespace log {
namespace {

const char* level_name(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "info";
}

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

Sink& current_sink() {
    static Sink sink = stderr_sink();
    return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex());
    std::swap(current_sink(), sink);
    return sink;
}

Sink stderr_sink(Level min_level) {
    return [min_level](const nlohmann::json& event) {
        static const nlohmann::json levels = {"debug", "info", "warn", "error"};
        const auto name = event.value("level", "info");
        int rank = 0;
        for (int i = 0; i < 4; ++i)
            if (levels[i] == name) rank = i;
        if (rank >= static_cast<int>(min_level)) std::cerr << event.dump() << '\n';
    };
}

void emit(Level level, const char* event, nlohmann::json fields) {
    nlohmann::json record = {{"level", level_name(level)}, {"event", event}};
    if (fields.is_object()) record.update(fields);
    std::lock_guard lock(sink_mutex());
    if (current_sink()) current_sink()(record);
}

}  // namespace log
}  // namespace corstitch
