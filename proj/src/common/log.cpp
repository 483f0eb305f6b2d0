#include "terradapt/common/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>

#include <memory>
#include <string>

namespace terradapt {

spdlog::logger& log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
        auto l = std::make_shared<spdlog::logger>("terradapt", sink);
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *logger;
}

void set_log_level(std::string_view level) {
    log().set_level(spdlog::level::from_str(std::string(level)));
}

} // namespace terradapt
