#pragma once

#include <spdlog/spdlog.h>

namespace terradapt {

// Library-wide logger. Writes to stderr so stdout stays reserved for command
// output.
spdlog::logger& log();

// Adjusts verbosity ("trace", "debug", "info", "warn", "error", "off").
void set_log_level(std::string_view level);

} // namespace terradapt
