// terradapt command-line entry point.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "terradapt/common/error.hpp"
#include "terradapt/common/log.hpp"
#include "terradapt/sim/pipeline.hpp"

namespace {

int exit_code(std::string_view kind) {
    if (kind == "ConfigError" || kind == "DimensionError") return 2;
    if (kind == "IoError") return 3;
    if (kind == "NumericalError") return 4;
    return 1;
}

void report(std::string_view kind, const std::string& message) {
    const terradapt::sim::json j = {{"error", kind}, {"message", message}};
    std::cerr << j.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Terrain-aware adaptive control: data generation, meta-training and closed-loop evaluation"};
    app.require_subcommand(1);
    std::string level = "info";
    app.add_option("--log-level", level, "trace, debug, info, warn, error, off");
    app.set_version_flag("--version", terradapt::sim::code_version());

    std::string config;
    std::vector<std::string> variants;
    bool telemetry = false;
    auto* gen = app.add_subcommand("gen-data", "simulate random inputs and write a training dataset");
    gen->add_option("config", config, "config file")->required();
    auto* train = app.add_subcommand("train", "meta-train the basis network on the dataset");
    train->add_option("config", config, "config file")->required();
    auto* sim = app.add_subcommand("simulate", "run the scenario and write telemetry and metrics");
    sim->add_option("config", config, "config file")->required();
    sim->add_option("--variants", variants, "controller variants (default: from config)");
    auto* eval = app.add_subcommand("evaluate", "paired comparison of controller variants");
    eval->add_option("config", config, "config file")->required();
    eval->add_option("--variants", variants, "controller variants, baseline first");
    eval->add_flag("--telemetry", telemetry, "also write per-run telemetry");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        report("UsageError", e.what());
        return 64;
    }

    try {
        terradapt::set_log_level(level);
        const terradapt::sim::Config cfg = terradapt::sim::load_config(config);
        terradapt::sim::json out;
        if (*gen) out = terradapt::sim::cmd_gen_data(cfg);
        else if (*train) out = terradapt::sim::cmd_train(cfg);
        else if (*sim) out = terradapt::sim::cmd_simulate(cfg, variants);
        else out = terradapt::sim::cmd_evaluate(cfg, variants, telemetry);
        std::cout << out.dump(2) << std::endl;
        return 0;
    } catch (const terradapt::Error& e) {
        report(e.kind(), e.what());
        return exit_code(e.kind());
    } catch (const terradapt::sim::json::exception& e) {
        report("ConfigError", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        report("IoError", e.what());
        return 3;
    } catch (const std::exception& e) {
        report("InternalError", e.what());
        return 1;
    }
}
