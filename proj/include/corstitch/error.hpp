#pragma once

#include <stdexcept>
#include <string>

namespace corstitch {

/// Pipeline stage an error originated in; the CLI maps these to exit codes.
enum class Stage { config, ingest, registration, stitch, georef, kmz, synth, verify };

const char* stage_name(Stage stage) noexcept;

class Error : public std::runtime_error {
public:
    Error(Stage stage, const std::string& what) : std::runtime_error(what), stage_(stage) {}
    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

/// Both strips carry no usable signal (constant after mean removal).
class DegeneratePairError : public Error {
public:
    DegeneratePairError() : Error(Stage::registration, "degenerate pair") {}
};

}  // namespace corstitch
